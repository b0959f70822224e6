//! Command line front end.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use clap::{Args, Parser, Subcommand};

use super::config::Settings;
use super::errors::compute_errors;
use super::study::{cells_for, run_convergence_study, run_mg_study, solve_problem};
use crate::error::{Error, Result};
use crate::meshgen::{fit_mesh, make_uniform_mesh, write_vtk, FitOptions};
use crate::quality::audit_fitted_mesh;

#[derive(Parser, Debug)]
#[command(name = "fitmg", version, about = "Interface-fitted finite elements with multigrid")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Fit a mesh to an interface, export it and audit element quality.
    Mesh(Common),
    /// Solve one problem and export the solution.
    Solve(Common),
    /// Error table over a sequence of mesh sizes.
    Converge(Common),
    /// Multigrid iteration counts over mesh sizes and jump ratios.
    Mgbench(Common),
}

#[derive(Args, Debug, Default)]
struct Common {
    /// key = value settings file; flags override it
    #[arg(long)]
    config: Option<String>,
    #[arg(long)]
    levelset: Option<String>,
    #[arg(long)]
    radius: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta1: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    beta2: Option<String>,
    /// 1, 2, 3 or none
    #[arg(long)]
    example: Option<String>,
    /// Coarsest grid (cells per side); the mesh size for `mesh`
    #[arg(long)]
    n0: Option<String>,
    /// Comma-separated inverse mesh sizes 1/h
    #[arg(long)]
    levels: Option<String>,
    /// Mesh sizes as h, e.g. 2^-7 or 2^-6,2^-7
    #[arg(long, allow_hyphen_values = true)]
    h: Option<String>,
    /// Comma-separated jump ratios beta1/beta2
    #[arg(long)]
    ratios: Option<String>,
    /// mg, cg or direct
    #[arg(long)]
    solver: Option<String>,
    /// nodal or exact
    #[arg(long = "g-mode")]
    g_mode: Option<String>,
    /// element or interface
    #[arg(long)]
    convention: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<String>,
    #[arg(long = "max-iters")]
    max_iters: Option<String>,
    #[arg(long)]
    out: Option<String>,
}

impl Common {
    fn settings(&self) -> Result<Settings> {
        let mut s = Settings::default();
        if let Some(path) = &self.config {
            s.apply_config(&fs::read_to_string(path)?)?;
        }
        let flags = [
            ("levelset", &self.levelset),
            ("radius", &self.radius),
            ("beta1", &self.beta1),
            ("beta2", &self.beta2),
            ("example", &self.example),
            ("n0", &self.n0),
            ("levels", &self.levels),
            ("h", &self.h),
            ("ratios", &self.ratios),
            ("solver", &self.solver),
            ("g-mode", &self.g_mode),
            ("convention", &self.convention),
            ("tol", &self.tol),
            ("max-iters", &self.max_iters),
            ("out", &self.out),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                s.set(k, v)?;
            }
        }
        Ok(s)
    }
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn write_text(dir: &Path, name: &str, text: &str) -> Result<()> {
    let mut w = create(dir, name)?;
    w.write_all(text.as_bytes())?;
    w.flush()?;
    Ok(())
}

fn run_mesh(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let ls = s.spec()?.levelset()?;
    let mesh = fit_mesh(&make_uniform_mesh(s.n0)?, &ls, &FitOptions::default())?;
    let report = audit_fitted_mesh(&mesh, std::f64::consts::FRAC_PI_4);
    let mut w = create(&s.out, "mesh.vtk")?;
    write_vtk(&mesh, &mut w, &[])?;
    w.flush()?;
    let mut w = create(&s.out, "quality.csv")?;
    report.write_csv(&mut w)?;
    w.flush()?;
    writeln!(
        out,
        "{}: {} vertices, {} elements ({} quadrilaterals), {} interface nodes",
        ls.name(),
        mesh.n_vertices(),
        mesh.elements.len(),
        mesh.n_quads(),
        mesh.interface_nodes.len()
    )?;
    writeln!(
        out,
        "angles in [{:.4}, {:.4}] rad; triangle violations {}, quadrilateral violations {}",
        report.min_angle,
        report.max_angle,
        report.count_triangle_violations(),
        report.count_quad_violations()
    )?;
    Ok(())
}

fn run_solve(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let spec = s.spec()?;
    let cfg = s.run_config()?;
    let inv_h = cfg.levels[0];
    let sol = solve_problem(&spec, cells_for(inv_h), &cfg)?;
    let u1 = sol.uh.values.clone();
    let u2: Vec<f64> = u1.iter().zip(&sol.uh.region2_offset).map(|(a, b)| a + b).collect();
    let mut w = create(&s.out, "solution.vtk")?;
    write_vtk(&sol.mesh, &mut w, &[("u_region1", &u1), ("u_region2", &u2)])?;
    w.flush()?;
    if let Some(stats) = &sol.stats {
        let mut csv = String::from("iteration,residual\n");
        for (i, r) in stats.residuals.iter().enumerate() {
            csv.push_str(&format!("{i},{r:.6e}\n"));
        }
        write_text(&s.out, "residuals.csv", &csv)?;
    }
    writeln!(
        out,
        "1/h = {inv_h}: {} dofs, {} iterations, relative residual {:.3e}",
        sol.dofs.n_dofs, sol.iterations, sol.residual
    )?;
    if let Some(ex) = spec.exact()? {
        let e = compute_errors(&sol.uh, &ex, &sol.mesh, cfg.convention)?;
        writeln!(out, "L2 error {:.4e}, H1 error {:.4e}", e.l2, e.h1)?;
    }
    Ok(())
}

fn run_converge(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let table = run_convergence_study(&s.spec()?, &s.run_config()?)?;
    let csv = table.to_csv();
    write_text(&s.out, "convergence.csv", &csv)?;
    out.write_all(csv.as_bytes())?;
    Ok(())
}

fn run_mgbench(s: &Settings, out: &mut dyn Write) -> Result<()> {
    let table = run_mg_study(&s.spec()?, &s.run_config()?)?;
    let csv = table.to_csv();
    write_text(&s.out, "mgbench.csv", &csv)?;
    out.write_all(csv.as_bytes())?;
    Ok(())
}

type Runner = fn(&Settings, &mut dyn Write) -> Result<()>;

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::InvalidArgument(_) | Error::UnknownLevelSet(_) | Error::UnknownExample(_) | Error::Expression(_) => 1,
        _ => 2,
    }
}

/// Runs the CLI; returns 0 on success, 1 on usage errors and 2 on
/// numerical or I/O failures.
pub fn cli_main<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let (common, run): (&Common, Runner) = match &cli.command {
        Command::Mesh(c) => (c, run_mesh),
        Command::Solve(c) => (c, run_solve),
        Command::Converge(c) => (c, run_converge),
        Command::Mgbench(c) => (c, run_mgbench),
    };
    let result = common.settings().and_then(|s| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run(&s, &mut lock)
    });
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
