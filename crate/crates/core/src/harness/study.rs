//! End-to-end solves and parameter sweeps.

use std::fmt::Write as _;
use std::path::PathBuf;

use super::errors::{compute_errors, eoc_sequence, ErrorConvention, ErrorReport};
use super::exact::{exact_registry, ExactSolution};
use crate::error::{Error, Result};
use crate::fem::{assemble, build_z_gamma, field_from_dofs, reconstruct_uh, DiscreteField, DofMap, GMode, ProblemData};
use crate::geometry::{builtin_levelsets, LevelSet, LevelSetParams};
use crate::linsolve::{solve_cg, solve_direct};
use crate::meshgen::{fit_mesh, make_uniform_mesh, FitOptions, FittedMesh, MeshHierarchy};
use crate::mg::{build_levels, solve_mg, MGConfig, SolveStats};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverChoice {
    #[default]
    Mg,
    Cg,
    Direct,
}

impl std::str::FromStr for SolverChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mg" => Ok(Self::Mg),
            "cg" => Ok(Self::Cg),
            "direct" => Ok(Self::Direct),
            _ => Err(Error::InvalidArgument(format!("solver '{s}' (expected mg, cg or direct)"))),
        }
    }
}

/// What to solve: an interface, coefficients, and optionally one of the
/// manufactured examples (which then fixes the interface and the data).
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemSpec {
    pub levelset: String,
    pub params: LevelSetParams,
    pub beta1: f64,
    pub beta2: f64,
    pub example: Option<u32>,
}

impl Default for ProblemSpec {
    fn default() -> Self {
        Self {
            levelset: "circle".into(),
            params: LevelSetParams::default(),
            beta1: 1.0,
            beta2: 1.0,
            example: None,
        }
    }
}

impl ProblemSpec {
    pub fn example(id: u32, beta1: f64, beta2: f64) -> Result<Self> {
        Ok(Self {
            levelset: exact_registry().levelset_name(id)?.into(),
            beta1,
            beta2,
            example: Some(id),
            ..Self::default()
        })
    }

    pub fn with_betas(&self, beta1: f64, beta2: f64) -> Self {
        Self { beta1, beta2, ..self.clone() }
    }

    pub fn levelset(&self) -> Result<LevelSet> {
        match self.exact()? {
            Some(ex) => Ok(ex.levelset),
            None => builtin_levelsets().lookup(&self.levelset, &self.params),
        }
    }

    pub fn exact(&self) -> Result<Option<ExactSolution>> {
        self.example
            .map(|id| exact_registry().get(id, self.beta1, self.beta2, &self.params))
            .transpose()
    }

    /// Example data, or unit source with zero jumps when no example is set.
    pub fn data(&self, g_mode: GMode) -> Result<ProblemData> {
        match self.exact()? {
            Some(ex) => ex.problem_data(g_mode),
            None => Ok(ProblemData::new(self.beta1, self.beta2)?.with_f(|_, _| 1.0).with_g_mode(g_mode)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Inverse mesh sizes `1/h`; the grid has `2/h` cells per side.
    pub levels: Vec<usize>,
    pub solver: SolverChoice,
    pub g_mode: GMode,
    /// Cells per side of the coarsest multigrid grid.
    pub n0: usize,
    /// Jump ratios `beta1/beta2` for multigrid sweeps.
    pub ratios: Vec<f64>,
    pub mg: MGConfig,
    pub convention: ErrorConvention,
    pub out_dir: Option<PathBuf>,
    pub write_csv: bool,
    pub write_vtk: bool,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            levels: vec![32, 64, 128],
            solver: SolverChoice::default(),
            g_mode: GMode::default(),
            n0: 8,
            ratios: vec![1e4, 1e2, 1e-2, 1e-4],
            mg: MGConfig::default(),
            convention: ErrorConvention::default(),
            out_dir: None,
            write_csv: true,
            write_vtk: false,
            seed: 0,
        }
    }
}

/// Coefficients realizing a jump ratio with the smaller one equal to 1.
pub fn betas_for_ratio(ratio: f64) -> (f64, f64) {
    if ratio >= 1.0 {
        (ratio, 1.0)
    } else {
        (1.0, 1.0 / ratio)
    }
}

/// Cells per side for an inverse mesh size.
pub fn cells_for(inv_h: usize) -> usize {
    2 * inv_h
}

#[derive(Debug)]
pub struct Solution {
    pub mesh: FittedMesh,
    pub dofs: DofMap,
    /// Homogeneous-jump part.
    pub ubar: DiscreteField,
    pub uh: DiscreteField,
    pub stats: Option<SolveStats>,
    pub iterations: usize,
    pub residual: f64,
}

fn mg_depth(n: usize, n0: usize) -> Result<usize> {
    if n0 < 2 || n < n0 || !n.is_multiple_of(n0) || !(n / n0).is_power_of_two() {
        return Err(Error::InvalidArgument(format!(
            "grid size {n} is not a power-of-two multiple of the coarse size {n0}"
        )));
    }
    Ok((n / n0).trailing_zeros() as usize)
}

/// Solves one problem on the grid with `n` cells per side.
pub fn solve_problem(spec: &ProblemSpec, n: usize, cfg: &RunConfig) -> Result<Solution> {
    let ls = spec.levelset()?;
    let data = spec.data(cfg.g_mode)?;
    let opts = FitOptions::default();

    let (mesh, levels) = match cfg.solver {
        SolverChoice::Mg => {
            let depth = mg_depth(n, cfg.n0)?;
            let hier = MeshHierarchy::build(&ls, cfg.n0, depth, &opts)?;
            let dofs: Vec<DofMap> = hier.levels.iter().map(DofMap::new).collect::<Result<_>>()?;
            let mesh = hier.levels[depth].clone();
            (mesh, Some((hier, dofs)))
        }
        _ => (fit_mesh(&make_uniform_mesh(n)?, &ls, &opts)?, None),
    };
    let dofs = DofMap::new(&mesh)?;
    let (a, b) = assemble(&mesh, &data, &dofs)?;

    let (x, stats, iterations) = match (cfg.solver, levels) {
        (SolverChoice::Mg, Some((hier, level_dofs))) => {
            let levels = build_levels(&hier, &a, &level_dofs)?;
            let (x, stats) = solve_mg(&levels, &b, &cfg.mg);
            let it = stats.iterations;
            (x?, Some(stats), it)
        }
        (SolverChoice::Cg, _) => {
            let (x, it) = solve_cg(&a, &b, cfg.mg.stopping_tol, 100 * n.max(100))?;
            (x, None, it)
        }
        _ => (solve_direct(&a, &b)?, None, 0),
    };

    let ax = a.mul_vec(&x);
    let rnorm = crate::sparse::norm2(&b.iter().zip(&ax).map(|(u, v)| u - v).collect::<Vec<_>>());
    let bnorm = crate::sparse::norm2(&b);
    let residual = if bnorm > 0.0 { rnorm / bnorm } else { rnorm };

    let ubar = field_from_dofs(&mesh, &data, &dofs, &x);
    let uh = reconstruct_uh(&ubar, &build_z_gamma(&mesh, &*data.q))?;
    Ok(Solution { mesh, dofs, ubar, uh, stats, iterations, residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceRow {
    pub inv_h: usize,
    pub errors: ErrorReport,
    pub l2_order: Option<f64>,
    pub h1_order: Option<f64>,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceTable {
    pub spec: ProblemSpec,
    pub rows: Vec<ConvergenceRow>,
}

/// Four significant digits with a two-digit exponent, e.g. `1.340e-03`.
pub fn fmt_sci4(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x:.3e}");
    }
    let s = format!("{x:.3e}");
    let (mant, exp) = s.split_once('e').unwrap();
    let e: i32 = exp.parse().unwrap();
    let sign = if e < 0 { '-' } else { '+' };
    format!("{mant}e{sign}{:02}", e.abs())
}

fn fmt_order(o: Option<f64>) -> String {
    o.map(|v| format!("{v:.4}")).unwrap_or_default()
}

impl ConvergenceTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("1/h,L2,order,H1,order\n");
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                r.inv_h,
                fmt_sci4(r.errors.l2),
                fmt_order(r.l2_order),
                fmt_sci4(r.errors.h1),
                fmt_order(r.h1_order)
            );
        }
        s
    }
}

pub fn run_convergence_study(spec: &ProblemSpec, cfg: &RunConfig) -> Result<ConvergenceTable> {
    let exact = spec
        .exact()?
        .ok_or_else(|| Error::InvalidArgument("a convergence study needs an exact solution (--example)".into()))?;
    if cfg.levels.is_empty() {
        return Err(Error::InvalidArgument("no mesh sizes given".into()));
    }
    let mut levels = cfg.levels.clone();
    levels.sort_unstable();
    levels.dedup();

    let mut errs = Vec::new();
    let mut its = Vec::new();
    for &inv_h in &levels {
        let sol = solve_problem(spec, cells_for(inv_h), cfg)?;
        errs.push(compute_errors(&sol.uh, &exact, &sol.mesh, cfg.convention)?);
        its.push(sol.iterations);
    }
    let h: Vec<f64> = levels.iter().map(|&k| 1.0 / k as f64).collect();
    let l2o = eoc_sequence(&errs.iter().map(|e| e.l2).collect::<Vec<_>>(), &h);
    let h1o = eoc_sequence(&errs.iter().map(|e| e.h1).collect::<Vec<_>>(), &h);
    let rows = (0..levels.len())
        .map(|i| ConvergenceRow {
            inv_h: levels[i],
            errors: errs[i],
            l2_order: l2o[i],
            h1_order: h1o[i],
            iterations: its[i],
        })
        .collect();
    Ok(ConvergenceTable { spec: spec.clone(), rows })
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgRow {
    pub inv_h: usize,
    pub ratio: f64,
    pub iterations: usize,
    pub contraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MgTable {
    pub rows: Vec<MgRow>,
}

impl MgTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("1/h,beta1/beta2,iterations,contraction\n");
        for r in &self.rows {
            let _ = writeln!(s, "{},{},{},{:.4}", r.inv_h, fmt_sci4(r.ratio), r.iterations, r.contraction);
        }
        s
    }

    pub fn iterations(&self, inv_h: usize, ratio: f64) -> Option<usize> {
        self.rows
            .iter()
            .find(|r| r.inv_h == inv_h && r.ratio == ratio)
            .map(|r| r.iterations)
    }
}

/// Multigrid iteration counts over `cfg.levels` and `cfg.ratios`.
pub fn run_mg_study(spec: &ProblemSpec, cfg: &RunConfig) -> Result<MgTable> {
    let mut levels = cfg.levels.clone();
    levels.sort_unstable();
    levels.dedup();
    let ratios = if cfg.ratios.is_empty() { vec![spec.beta1 / spec.beta2] } else { cfg.ratios.clone() };
    let cfg = RunConfig { solver: SolverChoice::Mg, ..cfg.clone() };
    let mut rows = Vec::new();
    for &inv_h in &levels {
        for &ratio in &ratios {
            let (b1, b2) = betas_for_ratio(ratio);
            let sol = solve_problem(&spec.with_betas(b1, b2), cells_for(inv_h), &cfg)?;
            let stats = sol.stats.unwrap_or_default();
            rows.push(MgRow { inv_h, ratio, iterations: stats.iterations, contraction: stats.contraction });
        }
    }
    Ok(MgTable { rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sci_formatting_is_fixed() {
        assert_eq!(fmt_sci4(1.3399e-3), "1.340e-03");
        assert_eq!(fmt_sci4(3.352e-2), "3.352e-02");
        assert_eq!(fmt_sci4(12346.0), "1.235e+04");
        assert_eq!(fmt_sci4(1e-4), "1.000e-04");
        assert_eq!(fmt_order(Some(1.89114)), "1.8911");
        assert_eq!(fmt_order(None), "");
    }

    #[test]
    fn ratios_to_coefficients() {
        assert_eq!(betas_for_ratio(1e4), (1e4, 1.0));
        assert_eq!(betas_for_ratio(1e-2), (1.0, 100.0));
    }

    #[test]
    fn single_level_table_has_no_orders() {
        let spec = ProblemSpec::example(1, 10.0, 1.0).unwrap();
        let cfg = RunConfig { levels: vec![4], solver: SolverChoice::Direct, ..RunConfig::default() };
        let t = run_convergence_study(&spec, &cfg).unwrap();
        assert_eq!(t.rows.len(), 1);
        assert!(t.rows[0].l2_order.is_none());
        let csv = t.to_csv();
        assert_eq!(csv.lines().count(), 2);
        assert!(csv.lines().nth(1).unwrap().ends_with(','));
    }

    #[test]
    fn solvers_agree() {
        let spec = ProblemSpec::example(2, 1e-2, 1.0).unwrap();
        let direct = solve_problem(&spec, 16, &RunConfig { solver: SolverChoice::Direct, ..RunConfig::default() }).unwrap();
        let mg = solve_problem(&spec, 16, &RunConfig { n0: 4, ..RunConfig::default() }).unwrap();
        let cg = solve_problem(&spec, 16, &RunConfig { solver: SolverChoice::Cg, ..RunConfig::default() }).unwrap();
        assert!(mg.iterations > 0 && cg.iterations > 0);
        let scale = direct.uh.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        for other in [&mg, &cg] {
            assert_eq!(other.mesh.n_vertices(), direct.mesh.n_vertices());
            for (a, b) in other.uh.values.iter().zip(&direct.uh.values) {
                assert!((a - b).abs() < 1e-6 * scale);
            }
        }
    }

    #[test]
    fn mg_depth_validation() {
        assert_eq!(mg_depth(64, 8).unwrap(), 3);
        assert!(mg_depth(48, 8).is_err());
        assert!(mg_depth(4, 8).is_err());
    }

    #[test]
    fn csv_is_deterministic() {
        let spec = ProblemSpec::example(3, 1.0, 10.0).unwrap();
        let cfg = RunConfig { levels: vec![4, 8], solver: SolverChoice::Direct, ..RunConfig::default() };
        let a = run_convergence_study(&spec, &cfg).unwrap().to_csv();
        let b = run_convergence_study(&spec, &cfg).unwrap().to_csv();
        assert_eq!(a, b);
    }
}
