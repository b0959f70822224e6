//! Interface-adaptive geometric multigrid on a nested fitted hierarchy.
//!
//! Every level smooths with a successive subspace correction: one exact
//! solve on the dofs inside the interface region of the next coarser grid,
//! then point Gauss-Seidel on the rest. Coarse operators are Galerkin
//! products of the finest stiffness matrix.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::fem::DofMap;
use crate::linsolve::Cholesky;
use crate::meshgen::{MeshHierarchy, NodeKey};
use crate::sparse::{norm2, CsrMatrix};

#[derive(Debug)]
pub struct MGLevel {
    pub level: usize,
    pub n: usize,
    pub a: CsrMatrix,
    /// Prolongation from level `level - 1`; `None` on level 0.
    pub p: Option<CsrMatrix>,
    pub interface_block: Vec<usize>,
    pub smooth_block: Vec<usize>,
    diag: Vec<f64>,
    /// Factor of the interface block on levels above 0, of the whole
    /// matrix on level 0.
    solver: Option<Cholesky>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MGConfig {
    pub stopping_tol: f64,
    pub max_iters: usize,
    pub pre_sweeps: usize,
    pub post_sweeps: usize,
}

impl Default for MGConfig {
    fn default() -> Self {
        Self {
            stopping_tol: (-20f64).exp(),
            max_iters: 100,
            pre_sweeps: 1,
            post_sweeps: 1,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Relative residuals, starting with 1 for the initial guess.
    pub residuals: Vec<f64>,
    /// Geometric mean of the residual reduction per iteration.
    pub contraction: f64,
}

/// Nodal-interpolation prolongation from `coarse` to `fine`.
pub fn prolongation(hier: &MeshHierarchy, l: usize, coarse: &DofMap, fine: &DofMap) -> Result<CsrMatrix> {
    if l == 0 || l > hier.top() {
        return Err(Error::InvalidArgument(format!("no prolongation into level {l}")));
    }
    let (cm, fm) = (&hier.levels[l - 1], &hier.levels[l]);
    let index: HashMap<NodeKey, usize> = cm.key_index();
    // half the cell size of the coarse base grid, in lattice units
    let s = (hier.lattice_n / (hier.n0 << (l - 1)) / 2) as i64;

    let coarse_weights = |v: usize, scale: f64, out: &mut Vec<(usize, f64)>| {
        for &(m, w) in coarse.masters(v) {
            if let Some(d) = coarse.dof(m) {
                out.push((d, scale * w));
            }
        }
    };

    let mut trip = Vec::with_capacity(fine.n_dofs * 2);
    let mut row = Vec::new();
    for v in 0..fm.n_vertices() {
        let Some(fd) = fine.dof(v) else { continue };
        row.clear();
        let key = fm.keys[v];
        if let Some(&cv) = index.get(&key) {
            coarse_weights(cv, 1.0, &mut row);
        } else {
            let NodeKey::Lattice(k) = key else {
                return Err(Error::NonNested(format!("cut node {key:?} of level {l} absent below")));
            };
            if k[0] % s != 0 || k[1] % s != 0 {
                return Err(Error::NonNested(format!("node {k:?} of level {l} is off the coarse grid")));
            }
            let (a, b) = ((k[0] / s) & 1, (k[1] / s) & 1);
            let d = match (a, b) {
                (1, 0) => [s, 0],
                (0, 1) => [0, s],
                (1, 1) => [s, s],
                _ => return Err(Error::NonNested(format!("node {k:?} of level {l} missing below"))),
            };
            let lo = NodeKey::Lattice([k[0] - d[0], k[1] - d[1]]);
            let hi = NodeKey::Lattice([k[0] + d[0], k[1] + d[1]]);
            match (index.get(&lo), index.get(&hi)) {
                (Some(&c1), Some(&c2)) => {
                    coarse_weights(c1, 0.5, &mut row);
                    coarse_weights(c2, 0.5, &mut row);
                }
                _ => {
                    return Err(Error::NonNested(format!(
                        "node {k:?} of level {l} is not an edge midpoint below"
                    )))
                }
            }
        }
        trip.extend(row.iter().map(|&(c, w)| (fd, c, w)));
    }
    Ok(CsrMatrix::from_triplets(fine.n_dofs, coarse.n_dofs, &trip))
}

/// Builds the level operators, splittings and factorizations from the
/// finest matrix `a_top`. `dofs[l]` numbers the unknowns of level `l`.
pub fn build_levels(hier: &MeshHierarchy, a_top: &CsrMatrix, dofs: &[DofMap]) -> Result<Vec<MGLevel>> {
    let top = hier.top();
    if dofs.len() != top + 1 {
        return Err(Error::Dimension(format!("{} dof maps for {} levels", dofs.len(), top + 1)));
    }
    if a_top.nrows() != dofs[top].n_dofs {
        return Err(Error::Dimension(format!(
            "matrix of size {} for {} dofs",
            a_top.nrows(),
            dofs[top].n_dofs
        )));
    }

    let mut ops: Vec<Option<CsrMatrix>> = (0..=top).map(|_| None).collect();
    let mut prolongations: Vec<Option<CsrMatrix>> = (0..=top).map(|_| None).collect();
    ops[top] = Some(a_top.clone());
    for l in (1..=top).rev() {
        let p = prolongation(hier, l, &dofs[l - 1], &dofs[l])?;
        let a = ops[l].as_ref().unwrap();
        let coarse = p.transpose().matmul(&a.matmul(&p)?)?;
        ops[l - 1] = Some(coarse);
        prolongations[l] = Some(p);
    }

    let mut levels = Vec::with_capacity(top + 1);
    for (l, (a, p)) in ops.into_iter().zip(prolongations).enumerate() {
        let a = a.unwrap();
        let mesh = &hier.levels[l];
        let mut interface_block = Vec::new();
        let mut smooth_block = Vec::new();
        let mut by_dof = vec![usize::MAX; dofs[l].n_dofs];
        for v in 0..mesh.n_vertices() {
            if let Some(d) = dofs[l].dof(v) {
                by_dof[d] = v;
            }
        }
        for (d, &v) in by_dof.iter().enumerate() {
            if hier.in_interface_region(l, &mesh.keys[v]) {
                interface_block.push(d);
            } else {
                smooth_block.push(d);
            }
        }
        let diag = a.diagonal();
        if let Some(i) = diag.iter().position(|&x| x <= 0.0) {
            return Err(Error::Singular(format!("non-positive diagonal at dof {i} of level {l}")));
        }
        let solver = if l == 0 {
            Some(Cholesky::new(&a)?)
        } else if !interface_block.is_empty() {
            Some(Cholesky::new(&a.submatrix(&interface_block, &interface_block))?)
        } else {
            None
        };
        levels.push(MGLevel {
            level: l,
            n: a.nrows(),
            a,
            p,
            interface_block,
            smooth_block,
            diag,
            solver,
        });
    }
    Ok(levels)
}

impl MGLevel {
    /// Stand-alone level with an explicit splitting, used for testing the
    /// smoother in isolation.
    pub fn with_blocks(a: CsrMatrix, interface_block: Vec<usize>) -> Result<Self> {
        let n = a.nrows();
        let mut inside = vec![false; n];
        for &i in &interface_block {
            inside[i] = true;
        }
        let smooth_block = (0..n).filter(|&i| !inside[i]).collect();
        let solver = if interface_block.is_empty() {
            None
        } else {
            Some(Cholesky::new(&a.submatrix(&interface_block, &interface_block))?)
        };
        Ok(Self {
            level: 1,
            n,
            diag: a.diagonal(),
            a,
            p: None,
            interface_block,
            smooth_block,
            solver,
        })
    }

    fn block_solve(&self, rhs: &[f64], x: &mut [f64]) {
        let Some(chol) = &self.solver else { return };
        let mut r: Vec<f64> = self
            .interface_block
            .iter()
            .map(|&i| rhs[i] - self.a.row_dot(i, x))
            .collect();
        chol.solve_in_place(&mut r);
        for (k, &i) in self.interface_block.iter().enumerate() {
            x[i] += r[k];
        }
    }

    fn gs_step(&self, i: usize, rhs: &[f64], x: &mut [f64]) {
        x[i] += (rhs[i] - self.a.row_dot(i, x)) / self.diag[i];
    }
}

/// Interface block solve, then forward Gauss-Seidel on the smooth block.
pub fn smooth(level: &MGLevel, rhs: &[f64], x: &mut [f64]) {
    level.block_solve(rhs, x);
    for &i in &level.smooth_block {
        level.gs_step(i, rhs, x);
    }
}

/// The adjoint of [`smooth`]: backward Gauss-Seidel, then the block solve.
pub fn smooth_adjoint(level: &MGLevel, rhs: &[f64], x: &mut [f64]) {
    for &i in level.smooth_block.iter().rev() {
        level.gs_step(i, rhs, x);
    }
    level.block_solve(rhs, x);
}

fn residual(a: &CsrMatrix, rhs: &[f64], x: &[f64]) -> Vec<f64> {
    let ax = a.mul_vec(x);
    rhs.iter().zip(ax).map(|(b, y)| b - y).collect()
}

/// One V-cycle on level `l` from a zero initial guess.
pub fn vcycle(levels: &[MGLevel], l: usize, rhs: &[f64]) -> Vec<f64> {
    vcycle_with(levels, l, rhs, &MGConfig::default())
}

pub fn vcycle_with(levels: &[MGLevel], l: usize, rhs: &[f64], cfg: &MGConfig) -> Vec<f64> {
    let lev = &levels[l];
    assert_eq!(rhs.len(), lev.n);
    if l == 0 {
        return match &lev.solver {
            Some(c) => c.solve(rhs),
            None => vec![0.0; lev.n],
        };
    }
    let mut x = vec![0.0; lev.n];
    for _ in 0..cfg.pre_sweeps {
        smooth(lev, rhs, &mut x);
    }
    let p = lev.p.as_ref().expect("prolongation above level 0");
    let rc = p.mul_transpose_vec(&residual(&lev.a, rhs, &x));
    let ec = vcycle_with(levels, l - 1, &rc, cfg);
    for (xi, e) in x.iter_mut().zip(p.mul_vec(&ec)) {
        *xi += e;
    }
    for _ in 0..cfg.post_sweeps {
        smooth_adjoint(lev, rhs, &mut x);
    }
    x
}

/// Stationary iteration `x <- x + B (b - A x)` from zero.
pub fn solve_mg(levels: &[MGLevel], b: &[f64], cfg: &MGConfig) -> (Result<Vec<f64>>, SolveStats) {
    let top = levels.len() - 1;
    let a = &levels[top].a;
    let n = a.nrows();
    let mut stats = SolveStats { residuals: vec![1.0], ..Default::default() };
    if b.len() != n {
        return (Err(Error::Dimension(format!("rhs {} vs {} dofs", b.len(), n))), stats);
    }
    if !(cfg.stopping_tol > 0.0) {
        return (Err(Error::InvalidArgument("stopping tolerance must be positive".into())), stats);
    }
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        stats.residuals[0] = 0.0;
        return (Ok(x), stats);
    }
    let mut r = b.to_vec();
    let mut rel = 1.0;
    while rel >= cfg.stopping_tol {
        if stats.iterations == cfg.max_iters {
            return (
                Err(Error::NoConvergence { iterations: cfg.max_iters, residual: rel }),
                stats,
            );
        }
        let e = vcycle_with(levels, top, &r, cfg);
        for (xi, ei) in x.iter_mut().zip(&e) {
            *xi += ei;
        }
        r = residual(a, b, &x);
        rel = norm2(&r) / bnorm;
        stats.iterations += 1;
        stats.residuals.push(rel);
    }
    stats.contraction = rel.powf(1.0 / stats.iterations as f64);
    (Ok(x), stats)
}

/// Dense `I - B A` of the V-cycle on the finest level.
pub fn error_propagation_dense(levels: &[MGLevel]) -> Vec<Vec<f64>> {
    let top = levels.len() - 1;
    let a = &levels[top].a;
    let n = a.nrows();
    let mut e = vec![vec![0.0; n]; n];
    for j in 0..n {
        let mut col = vec![0.0; n];
        for (i, v) in a.row(j).0.iter().zip(a.row(j).1) {
            // column j of a symmetric A equals row j
            col[*i] = *v;
        }
        let bc = vcycle(levels, top, &col);
        for i in 0..n {
            e[i][j] = f64::from(u8::from(i == j)) - bc[i];
        }
    }
    e
}
