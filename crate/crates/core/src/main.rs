fn main() {
    std::process::exit(fitmg::harness::cli_main(std::env::args_os()));
}
