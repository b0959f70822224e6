//! P1 triangles and isoparametric Q1 quadrilaterals.

use super::quadrature::QuadRule;
use crate::error::{Error, Result};
use crate::geometry::Point2;

/// Bilinear shape functions on `[0,1]^2`, ordered `(0,0) (1,0) (1,1) (0,1)`.
pub fn q1_shape(r: Point2) -> [f64; 4] {
    let (x, y) = (r.x, r.y);
    [(1.0 - x) * (1.0 - y), x * (1.0 - y), x * y, (1.0 - x) * y]
}

pub fn q1_shape_grad(r: Point2) -> [[f64; 2]; 4] {
    let (x, y) = (r.x, r.y);
    [
        [-(1.0 - y), -(1.0 - x)],
        [1.0 - y, -x],
        [y, x],
        [-y, 1.0 - x],
    ]
}

pub fn q1_map(q: &[Point2; 4], r: Point2) -> Point2 {
    let s = q1_shape(r);
    let mut p = Point2::default();
    for k in 0..4 {
        p = p + s[k] * q[k];
    }
    p
}

/// `J[i][j] = d x_i / d r_j`
pub fn q1_jacobian(q: &[Point2; 4], r: Point2) -> [[f64; 2]; 2] {
    let g = q1_shape_grad(r);
    let mut j = [[0.0; 2]; 2];
    for k in 0..4 {
        j[0][0] += q[k].x * g[k][0];
        j[0][1] += q[k].x * g[k][1];
        j[1][0] += q[k].y * g[k][0];
        j[1][1] += q[k].y * g[k][1];
    }
    j
}

fn det(j: &[[f64; 2]; 2]) -> f64 {
    j[0][0] * j[1][1] - j[0][1] * j[1][0]
}

/// Physical gradient `J^{-T} g_ref`.
fn pull_back(j: &[[f64; 2]; 2], d: f64, g: [f64; 2]) -> [f64; 2] {
    [
        (j[1][1] * g[0] - j[1][0] * g[1]) / d,
        (-j[0][1] * g[0] + j[0][0] * g[1]) / d,
    ]
}

/// Reference coordinates of `p` by Newton's method.
pub fn q1_inverse(q: &[Point2; 4], p: Point2) -> Result<Point2> {
    let mut r = Point2::new(0.5, 0.5);
    let scale = q[0].dist(q[2]).max(q[1].dist(q[3]));
    for _ in 0..50 {
        let res = q1_map(q, r) - p;
        if res.norm() <= 1e-14 * scale.max(1e-300) {
            return Ok(r);
        }
        let j = q1_jacobian(q, r);
        let d = det(&j);
        if d == 0.0 {
            break;
        }
        let dx = (j[1][1] * res.x - j[0][1] * res.y) / d;
        let dy = (-j[1][0] * res.x + j[0][0] * res.y) / d;
        r = Point2::new(r.x - dx, r.y - dy);
    }
    let res = q1_map(q, r) - p;
    if res.norm() <= 1e-10 * scale {
        Ok(r)
    } else {
        Err(Error::DegenerateElement(format!(
            "cannot invert bilinear map at ({}, {})",
            p.x, p.y
        )))
    }
}

/// Barycentric gradients and twice the signed area.
pub fn p1_gradients(t: &[Point2; 3]) -> Result<([[f64; 2]; 3], f64)> {
    let d = (t[1] - t[0]).cross(t[2] - t[0]);
    if d == 0.0 || !d.is_finite() {
        return Err(Error::DegenerateElement(format!(
            "triangle ({}, {}) ({}, {}) ({}, {})",
            t[0].x, t[0].y, t[1].x, t[1].y, t[2].x, t[2].y
        )));
    }
    let mut g = [[0.0; 2]; 3];
    for k in 0..3 {
        let (a, b) = (t[(k + 1) % 3], t[(k + 2) % 3]);
        g[k] = [(a.y - b.y) / d, (b.x - a.x) / d];
    }
    Ok((g, d))
}

pub fn local_stiffness_tri(t: &[Point2; 3], beta: f64) -> Result<[[f64; 3]; 3]> {
    let (g, d) = p1_gradients(t)?;
    let area = 0.5 * d.abs();
    let mut k = [[0.0; 3]; 3];
    for a in 0..3 {
        for b in 0..3 {
            k[a][b] = beta * area * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
        }
    }
    Ok(k)
}

pub fn local_stiffness_quad(q: &[Point2; 4], beta: f64, rule: &QuadRule) -> Result<[[f64; 4]; 4]> {
    let mut k = [[0.0; 4]; 4];
    for (r, w) in rule.iter() {
        let r = Point2::new(r[0], r[1]);
        let j = q1_jacobian(q, r);
        let d = det(&j);
        if d <= 0.0 {
            return Err(Error::DegenerateElement(format!(
                "non-positive Jacobian {d:e} in quadrilateral ({}, {})..",
                q[0].x, q[0].y
            )));
        }
        let gref = q1_shape_grad(r);
        let g: Vec<[f64; 2]> = gref.iter().map(|&gr| pull_back(&j, d, gr)).collect();
        for a in 0..4 {
            for b in 0..4 {
                k[a][b] += beta * w * d * (g[a][0] * g[b][0] + g[a][1] * g[b][1]);
            }
        }
    }
    Ok(k)
}

/// Values and physical gradients of the local basis at a quadrature point.
#[derive(Debug, Clone, Copy)]
pub struct QPoint {
    pub x: Point2,
    /// Quadrature weight times `|det J|`.
    pub weight: f64,
    pub n: usize,
    pub phi: [f64; 4],
    pub grad: [[f64; 2]; 4],
}

/// Calls `f` at every quadrature point of a triangle or quadrilateral
/// given by its counterclockwise corners.
pub fn for_each_qpoint<F: FnMut(&QPoint)>(
    pts: &[Point2],
    tri_rule: &QuadRule,
    quad_rule: &QuadRule,
    mut f: F,
) -> Result<()> {
    match pts.len() {
        3 => {
            let t = [pts[0], pts[1], pts[2]];
            let (g, d) = p1_gradients(&t)?;
            for (r, w) in tri_rule.iter() {
                let phi = [1.0 - r[0] - r[1], r[0], r[1]];
                let x = phi[0] * t[0] + phi[1] * t[1] + phi[2] * t[2];
                f(&QPoint {
                    x,
                    weight: w * d.abs(),
                    n: 3,
                    phi: [phi[0], phi[1], phi[2], 0.0],
                    grad: [g[0], g[1], g[2], [0.0; 2]],
                });
            }
            Ok(())
        }
        4 => {
            let q = [pts[0], pts[1], pts[2], pts[3]];
            for (r, w) in quad_rule.iter() {
                let r = Point2::new(r[0], r[1]);
                let j = q1_jacobian(&q, r);
                let d = det(&j);
                if d <= 0.0 {
                    return Err(Error::DegenerateElement(format!(
                        "non-positive Jacobian {d:e} in quadrilateral"
                    )));
                }
                let gref = q1_shape_grad(r);
                f(&QPoint {
                    x: q1_map(&q, r),
                    weight: w * d,
                    n: 4,
                    phi: q1_shape(r),
                    grad: gref.map(|gr| pull_back(&j, d, gr)),
                });
            }
            Ok(())
        }
        n => Err(Error::InvalidArgument(format!("element with {n} nodes"))),
    }
}
