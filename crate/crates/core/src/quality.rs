//! Angle conditions and the regular decomposition property of fitted meshes.

use std::f64::consts::PI;
use std::io::Write;

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::meshgen::{strictly_convex, ElementKind, FittedMesh};

/// Interior angles at `a`, `b`, `c` from the law of cosines on squared
/// edge lengths.
pub fn triangle_angles(a: Point2, b: Point2, c: Point2) -> Result<[f64; 3]> {
    let sq = |p: Point2, q: Point2| (p - q).dot(p - q);
    let (la, lb, lc) = (sq(b, c), sq(c, a), sq(a, b));
    let twice_area = (b - a).cross(c - a);
    if la == 0.0 || lb == 0.0 || lc == 0.0 || twice_area == 0.0 {
        return Err(Error::DegenerateElement(format!(
            "triangle ({}, {}) ({}, {}) ({}, {})",
            a.x, a.y, b.x, b.y, c.x, c.y
        )));
    }
    let angle = |opp: f64, s1: f64, s2: f64| {
        let cos = (s1 + s2 - opp) / (2.0 * (s1 * s2).sqrt());
        cos.clamp(-1.0, 1.0).acos()
    };
    Ok([angle(la, lb, lc), angle(lb, lc, la), angle(lc, la, lb)])
}

fn max_angle(a: Point2, b: Point2, c: Point2) -> Result<f64> {
    Ok(triangle_angles(a, b, c)?.into_iter().fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rdp {
    /// Ratio of the other diagonal to the splitting one.
    pub n: f64,
    /// Largest angle of the two sub-triangles.
    pub psi: f64,
    /// 0 splits along `q0 q2`, 1 along `q1 q3`.
    pub diagonal: u8,
}

/// Best split of a strictly convex counterclockwise quadrilateral.
pub fn check_rdp(q: [Point2; 4]) -> Result<Rdp> {
    if !strictly_convex(&q) {
        return Err(Error::NonConvexQuad(q));
    }
    let d0 = q[0].dist(q[2]);
    let d1 = q[1].dist(q[3]);
    let psi0 = max_angle(q[0], q[1], q[2])?.max(max_angle(q[0], q[2], q[3])?);
    let psi1 = max_angle(q[1], q[2], q[3])?.max(max_angle(q[1], q[3], q[0])?);
    let first = Rdp { n: d1 / d0, psi: psi0, diagonal: 0 };
    let second = Rdp { n: d0 / d1, psi: psi1, diagonal: 1 };
    let tie = (psi0 - psi1).abs() <= 1e-12 * PI;
    Ok(if tie {
        if second.n < first.n {
            second
        } else {
            first
        }
    } else if psi1 < psi0 {
        second
    } else {
        first
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ElementQuality {
    pub element: usize,
    pub kind: ElementKind,
    pub min_angle: f64,
    pub max_angle: f64,
    /// RDP pair for quadrilaterals; `(1, max_angle)` for triangles.
    pub rdp_n: f64,
    pub rdp_psi: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    MaxAngle { element: usize, angle: f64 },
    RdpAngle { element: usize, psi: f64 },
    RdpRatio { element: usize, n: f64 },
    Degenerate { element: usize },
}

#[derive(Debug, Clone)]
pub struct QualityReport {
    pub alpha: f64,
    /// Constant `C` in the diagonal-ratio bound `N <= C / sin(alpha)`.
    pub ratio_constant: f64,
    pub min_angle: f64,
    pub max_angle: f64,
    pub worst_rdp_n: f64,
    pub worst_rdp_psi: f64,
    pub elements: Vec<ElementQuality>,
    pub violations: Vec<Violation>,
}

pub const RDP_RATIO_CONSTANT: f64 = 2.0;

/// Checks every triangle against `Maxac(pi - alpha)` and every
/// quadrilateral against `RDP(C / sin(alpha), pi - alpha)`.
pub fn audit_fitted_mesh(mesh: &FittedMesh, alpha: f64) -> QualityReport {
    let bound = PI - alpha;
    let n_bound = RDP_RATIO_CONSTANT / alpha.sin();
    let slack = 1e-12;
    let mut report = QualityReport {
        alpha,
        ratio_constant: RDP_RATIO_CONSTANT,
        min_angle: PI,
        max_angle: 0.0,
        worst_rdp_n: 1.0,
        worst_rdp_psi: 0.0,
        elements: Vec::with_capacity(mesh.elements.len()),
        violations: Vec::new(),
    };
    for (e, el) in mesh.elements.iter().enumerate() {
        let p = mesh.element_points(e);
        let row = match el.kind {
            ElementKind::Tri3 => triangle_angles(p[0], p[1], p[2]).map(|ang| {
                let (lo, hi) = min_max(&ang);
                ElementQuality {
                    element: e,
                    kind: el.kind,
                    min_angle: lo,
                    max_angle: hi,
                    rdp_n: 1.0,
                    rdp_psi: hi,
                }
            }),
            ElementKind::Quad4 => {
                let q = [p[0], p[1], p[2], p[3]];
                check_rdp(q).map(|rdp| {
                    let corners: Vec<f64> = (0..4)
                        .map(|k| {
                            let (u, v) = (q[(k + 1) % 4] - q[k], q[(k + 3) % 4] - q[k]);
                            u.cross(v).atan2(u.dot(v))
                        })
                        .collect();
                    let (lo, hi) = min_max(&corners);
                    ElementQuality {
                        element: e,
                        kind: el.kind,
                        min_angle: lo,
                        max_angle: hi,
                        rdp_n: rdp.n,
                        rdp_psi: rdp.psi,
                    }
                })
            }
        };
        let Ok(row) = row else {
            report.violations.push(Violation::Degenerate { element: e });
            continue;
        };
        match el.kind {
            ElementKind::Tri3 => {
                if row.max_angle > bound + slack {
                    report.violations.push(Violation::MaxAngle { element: e, angle: row.max_angle });
                }
            }
            ElementKind::Quad4 => {
                if row.rdp_psi > bound + slack {
                    report.violations.push(Violation::RdpAngle { element: e, psi: row.rdp_psi });
                }
                if row.rdp_n > n_bound {
                    report.violations.push(Violation::RdpRatio { element: e, n: row.rdp_n });
                }
                report.worst_rdp_n = report.worst_rdp_n.max(row.rdp_n);
                report.worst_rdp_psi = report.worst_rdp_psi.max(row.rdp_psi);
            }
        }
        report.min_angle = report.min_angle.min(row.min_angle);
        report.max_angle = report.max_angle.max(row.max_angle);
        report.elements.push(row);
    }
    report
}

fn min_max(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::MAX, f64::MIN), |(lo, hi), &x| (lo.min(x), hi.max(x)))
}

impl QualityReport {
    pub fn count_triangle_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::MaxAngle { .. }))
            .count()
    }

    pub fn count_quad_violations(&self) -> usize {
        self.violations
            .iter()
            .filter(|v| matches!(v, Violation::RdpAngle { .. } | Violation::RdpRatio { .. }))
            .count()
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "element,kind,min_angle,max_angle,rdp_n,rdp_psi")?;
        for r in &self.elements {
            let kind = match r.kind {
                ElementKind::Tri3 => "tri",
                ElementKind::Quad4 => "quad",
            };
            writeln!(
                w,
                "{},{},{:.6e},{:.6e},{:.6e},{:.6e}",
                r.element, kind, r.min_angle, r.max_angle, r.rdp_n, r.rdp_psi
            )?;
        }
        Ok(())
    }
}
