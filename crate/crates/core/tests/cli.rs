use std::fs;
use std::process::Command;

fn fitmg(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fitmg")).args(args).output().unwrap()
}

#[test]
fn mesh_writes_vtk_and_quality() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fitmg(&["mesh", "--levelset", "cardioid", "--n0", "16", "--out", out]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let vtk = fs::read_to_string(dir.path().join("mesh.vtk")).unwrap();
    assert!(vtk.starts_with("# vtk DataFile"));
    let csv = fs::read_to_string(dir.path().join("quality.csv")).unwrap();
    assert!(csv.lines().count() > 1);
    assert!(String::from_utf8_lossy(&o.stdout).contains("violations 0"));
}

#[test]
fn solve_and_converge_from_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, format!("example = 2\nbeta1 = 10\nlevels = 8, 16\nout = {}\n", dir.path().display())).unwrap();
    let cfg = cfg.to_str().unwrap();

    let o = fitmg(&["solve", "--config", cfg]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(dir.path().join("solution.vtk").exists());
    let res = fs::read_to_string(dir.path().join("residuals.csv")).unwrap();
    assert!(res.starts_with("iteration,residual\n0,1.000000e0\n"));

    let o = fitmg(&["converge", "--config", cfg, "--solver", "direct"]);
    assert!(o.status.success());
    let table = fs::read_to_string(dir.path().join("convergence.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "1/h,L2,order,H1,order");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("8,"));
}

#[test]
fn mgbench_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = fitmg(&["mgbench", "--example", "1", "--h", "2^-4,2^-5", "--ratios", "1e2,1e-2", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let table = fs::read_to_string(dir.path().join("mgbench.csv")).unwrap();
    assert_eq!(table.lines().count(), 5);
    assert!(table.starts_with("1/h,beta1/beta2,iterations,contraction\n16,"));
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(fitmg(&["solve", "--levelset", "hexagon"]).status.code(), Some(1));
    assert_eq!(fitmg(&["solve", "--example", "9"]).status.code(), Some(1));
    assert_eq!(fitmg(&["solve", "--beta1", "-1"]).status.code(), Some(1));
    assert_eq!(fitmg(&["frobnicate"]).status.code(), Some(1));
    // a grid that is not a power-of-two multiple of n0
    assert_eq!(fitmg(&["solve", "--levels", "12"]).status.code(), Some(1));
}
