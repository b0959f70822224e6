//! Discretization errors and observed orders.

use super::exact::ExactSolution;
use crate::error::Result;
use crate::fem::{for_each_qpoint, DiscreteField, QuadRule};
use crate::geometry::{LevelSet, Point2, RegionId};
use crate::meshgen::FittedMesh;

/// Which branch of a two-sided exact solution a quadrature point compares
/// against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ErrorConvention {
    /// The region tag of the element holding the point.
    #[default]
    ElementRegion,
    /// The sign of the level set at the point, falling back to the element
    /// tag on the interface itself.
    TrueInterface,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ErrorReport {
    pub l2: f64,
    /// Broken seminorm over both subdomains.
    pub h1: f64,
    pub weighted_l2: f64,
    pub weighted_h1: f64,
}

/// Errors against a function given per region, with `beta` weights for the
/// weighted norms.
pub fn compute_errors_fn(
    uh: &DiscreteField,
    mesh: &FittedMesh,
    u: &dyn Fn(Point2, RegionId) -> f64,
    grad: &dyn Fn(Point2, RegionId) -> [f64; 2],
    beta: [f64; 2],
    branch: &dyn Fn(Point2, RegionId) -> RegionId,
) -> Result<ErrorReport> {
    let tri = QuadRule::triangle_7();
    let quad = QuadRule::square_gauss(3);
    let mut acc = [0.0f64; 4];
    for (e, el) in mesh.elements.iter().enumerate() {
        let b = beta[el.region.index()];
        for_each_qpoint(&mesh.element_points(e), &tri, &quad, |qp| {
            let r = branch(qp.x, el.region);
            let (val, g) = uh.eval_qpoint(mesh, e, qp);
            let ge = grad(qp.x, r);
            let d0 = (u(qp.x, r) - val).powi(2);
            let d1 = (ge[0] - g[0]).powi(2) + (ge[1] - g[1]).powi(2);
            acc[0] += qp.weight * d0;
            acc[1] += qp.weight * d1;
            acc[2] += qp.weight * b * d0;
            acc[3] += qp.weight * b * d1;
        })?;
    }
    Ok(ErrorReport {
        l2: acc[0].sqrt(),
        h1: acc[1].sqrt(),
        weighted_l2: acc[2].sqrt(),
        weighted_h1: acc[3].sqrt(),
    })
}

pub fn compute_errors(
    uh: &DiscreteField,
    exact: &ExactSolution,
    mesh: &FittedMesh,
    convention: ErrorConvention,
) -> Result<ErrorReport> {
    let ls: &LevelSet = &exact.levelset;
    let branch = |p: Point2, tag: RegionId| match convention {
        ErrorConvention::ElementRegion => tag,
        ErrorConvention::TrueInterface => ls.region(p).unwrap_or(tag),
    };
    compute_errors_fn(
        uh,
        mesh,
        &|p, r| exact.u(p, r),
        &|p, r| exact.grad(p, r),
        [exact.beta1, exact.beta2],
        &branch,
    )
}

/// Observed order between two meshes, `log(e1 / e2) / log(h1 / h2)`.
pub fn eoc(e1: f64, h1: f64, e2: f64, h2: f64) -> f64 {
    (e1 / e2).ln() / (h1 / h2).ln()
}

/// Orders along a sequence, `None` for the first entry.
pub fn eoc_sequence(errors: &[f64], h: &[f64]) -> Vec<Option<f64>> {
    assert_eq!(errors.len(), h.len());
    (0..errors.len())
        .map(|i| (i > 0).then(|| eoc(errors[i - 1], h[i - 1], errors[i], h[i])))
        .collect()
}
