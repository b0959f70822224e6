//! Manufactured solutions of the three benchmark problems.

use std::f64::consts::PI;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::fem::{GMode, ProblemData};
use crate::geometry::{builtin_levelsets, LevelSet, LevelSetParams, Point2, RegionId};

type Field = Arc<dyn Fn(Point2, RegionId) -> f64 + Send + Sync>;
type GradField = Arc<dyn Fn(Point2, RegionId) -> [f64; 2] + Send + Sync>;
type Scalar = Arc<dyn Fn(Point2) -> f64 + Send + Sync>;

/// A piecewise smooth exact solution together with the data it induces.
#[derive(Clone)]
pub struct ExactSolution {
    pub id: u32,
    pub levelset: LevelSet,
    pub beta1: f64,
    pub beta2: f64,
    u: Field,
    grad: GradField,
    f: Field,
    q: Scalar,
    g: Scalar,
}

impl std::fmt::Debug for ExactSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExactSolution")
            .field("id", &self.id)
            .field("levelset", &self.levelset.name())
            .field("beta1", &self.beta1)
            .field("beta2", &self.beta2)
            .finish()
    }
}

impl ExactSolution {
    pub fn u(&self, p: Point2, r: RegionId) -> f64 {
        (self.u)(p, r)
    }

    pub fn grad(&self, p: Point2, r: RegionId) -> [f64; 2] {
        (self.grad)(p, r)
    }

    pub fn f(&self, p: Point2, r: RegionId) -> f64 {
        (self.f)(p, r)
    }

    /// Solution jump `u|_1 - u|_2`.
    pub fn q(&self, p: Point2) -> f64 {
        (self.q)(p)
    }

    /// Flux jump.
    pub fn g(&self, p: Point2) -> f64 {
        (self.g)(p)
    }

    pub fn beta(&self, r: RegionId) -> f64 {
        match r {
            RegionId::Region1 => self.beta1,
            RegionId::Region2 => self.beta2,
        }
    }

    pub fn problem_data(&self, g_mode: GMode) -> Result<ProblemData> {
        let (f, q, g) = (self.f.clone(), self.q.clone(), self.g.clone());
        Ok(ProblemData::new(self.beta1, self.beta2)?
            .with_f(move |p, r| f(p, r))
            .with_q(move |p| q(p))
            .with_g(move |p| g(p))
            .with_g_mode(g_mode))
    }
}

fn sines(p: Point2) -> (f64, [f64; 2]) {
    let (sx, cx) = (PI * p.x).sin_cos();
    let (sy, cy) = (PI * p.y).sin_cos();
    (sx * sy, [PI * cx * sy, PI * sx * cy])
}

/// `u = phi sin(pi x) sin(pi y) / beta` with `phi = x^2 + y^2 - r^2`.
fn example1(beta1: f64, beta2: f64, r: f64) -> ExactSolution {
    let b = move |reg: RegionId| if reg == RegionId::Region1 { beta1 } else { beta2 };
    let phi = move |p: Point2| p.x * p.x + p.y * p.y - r * r;
    ExactSolution {
        id: 1,
        levelset: crate::geometry::circle(r),
        beta1,
        beta2,
        u: Arc::new(move |p, reg| phi(p) * sines(p).0 / b(reg)),
        grad: Arc::new(move |p, reg| {
            let (s, ds) = sines(p);
            let ph = phi(p);
            [
                (2.0 * p.x * s + ph * ds[0]) / b(reg),
                (2.0 * p.y * s + ph * ds[1]) / b(reg),
            ]
        }),
        // -lap(phi s) = -(4 s + 2 grad phi . grad s + phi lap s)
        f: Arc::new(move |p, _| {
            let (sx, cx) = (PI * p.x).sin_cos();
            let (sy, cy) = (PI * p.y).sin_cos();
            let s = sx * sy;
            -4.0 * s - 4.0 * PI * (p.x * cx * sy + p.y * sx * cy) + 2.0 * PI * PI * phi(p) * s
        }),
        q: Arc::new(|_| 0.0),
        g: Arc::new(|_| 0.0),
    }
}

/// `u = sin(pi x) sin(pi y) / beta + c delta` with `delta = 1` in Region2.
fn shifted_sines(id: u32, levelset: LevelSet, beta1: f64, beta2: f64, c: f64) -> ExactSolution {
    let b = move |reg: RegionId| if reg == RegionId::Region1 { beta1 } else { beta2 };
    let delta = move |reg: RegionId| if reg == RegionId::Region2 { c } else { 0.0 };
    ExactSolution {
        id,
        levelset,
        beta1,
        beta2,
        u: Arc::new(move |p, reg| sines(p).0 / b(reg) + delta(reg)),
        grad: Arc::new(move |p, reg| {
            let ds = sines(p).1;
            [ds[0] / b(reg), ds[1] / b(reg)]
        }),
        f: Arc::new(|p, _| 2.0 * PI * PI * sines(p).0),
        q: Arc::new(move |p| (1.0 / beta1 - 1.0 / beta2) * sines(p).0 - c),
        g: Arc::new(|_| 0.0),
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct ExactRegistry;

pub fn exact_registry() -> ExactRegistry {
    ExactRegistry
}

impl ExactRegistry {
    pub fn ids(&self) -> &'static [u32] {
        &[1, 2, 3]
    }

    /// Name of the builtin level set each example uses.
    pub fn levelset_name(&self, id: u32) -> Result<&'static str> {
        match id {
            1 => Ok("circle"),
            2 => Ok("cardioid"),
            3 => Ok("fivestar-circle"),
            _ => Err(Error::UnknownExample(id.to_string())),
        }
    }

    pub fn get(&self, id: u32, beta1: f64, beta2: f64, params: &LevelSetParams) -> Result<ExactSolution> {
        if !(beta1 > 0.0 && beta2 > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "coefficients must be positive, got beta1={beta1}, beta2={beta2}"
            )));
        }
        match id {
            1 => Ok(example1(beta1, beta2, params.radius)),
            2 | 3 => {
                let ls = builtin_levelsets().lookup(self.levelset_name(id)?, params)?;
                let c = if id == 2 { 5.0 } else { 1.0 };
                Ok(shifted_sines(id, ls, beta1, beta2, c))
            }
            _ => Err(Error::UnknownExample(id.to_string())),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn get(id: u32, b1: f64, b2: f64) -> ExactSolution {
        exact_registry().get(id, b1, b2, &LevelSetParams::default()).unwrap()
    }

    // -beta * five-point Laplacian of the region branch
    fn fd_source(ex: &ExactSolution, p: Point2, r: RegionId) -> f64 {
        let h = 1e-3;
        let u = |x: f64, y: f64| ex.u(Point2::new(x, y), r);
        let lap = (u(p.x + h, p.y) + u(p.x - h, p.y) + u(p.x, p.y + h) + u(p.x, p.y - h) - 4.0 * u(p.x, p.y)) / (h * h);
        -ex.beta(r) * lap
    }

    #[test]
    fn sources_match_finite_difference_laplacian() {
        for id in [1, 2, 3] {
            for (b1, b2) in [(1e4, 1.0), (1.0, 1e-2), (3.0, 7.0)] {
                let ex = get(id, b1, b2);
                for k in 0..40 {
                    let t = k as f64 * 0.61803398875;
                    let p = Point2::new((3.1 * t).sin() * 0.95, (1.7 * t + 0.3).cos() * 0.95);
                    if ex.levelset.eval(p).abs() < 1e-2 {
                        continue;
                    }
                    let r = ex.levelset.region(p).unwrap();
                    let want = fd_source(&ex, p, r);
                    let got = ex.f(p, r);
                    assert!((got - want).abs() < 1e-4 * (1.0 + want.abs()), "ex {id} at {p:?}: {got} vs {want}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        for id in [1, 2, 3] {
            let ex = get(id, 2.0, 0.5);
            for r in [RegionId::Region1, RegionId::Region2] {
                let p = Point2::new(0.31, -0.47);
                let h = 1e-6;
                let d = |dx: f64, dy: f64| ex.u(Point2::new(p.x + dx, p.y + dy), r);
                let fd = [(d(h, 0.0) - d(-h, 0.0)) / (2.0 * h), (d(0.0, h) - d(0.0, -h)) / (2.0 * h)];
                let g = ex.grad(p, r);
                assert!((g[0] - fd[0]).abs() < 1e-7 && (g[1] - fd[1]).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn jump_data_examples() {
        let ex = get(1, 1e4, 1.0);
        for k in 0..16 {
            let t = k as f64 * std::f64::consts::TAU / 16.0;
            let p = Point2::new(0.5 * t.cos(), 0.5 * t.sin());
            assert_eq!(ex.q(p), 0.0);
            assert_eq!(ex.g(p), 0.0);
            // both branches vanish on the circle and the fluxes agree
            let (u1, u2) = (ex.u(p, RegionId::Region1), ex.u(p, RegionId::Region2));
            assert!((u1 - u2).abs() < 1e-15);
            let n = [p.x / 0.5, p.y / 0.5];
            let (g1, g2) = (ex.grad(p, RegionId::Region1), ex.grad(p, RegionId::Region2));
            let flux = |g: [f64; 2], b: f64| b * (g[0] * n[0] + g[1] * n[1]);
            assert!((flux(g1, 1e4) - flux(g2, 1.0)).abs() < 1e-12);
        }
        let ex2 = get(2, 10.0, 1.0);
        assert_eq!(ex2.q(Point2::new(0.0, 0.3)), -5.0);
        let p = Point2::new(0.2, 0.4);
        assert!((ex2.q(p) - (ex2.u(p, RegionId::Region1) - ex2.u(p, RegionId::Region2))).abs() < 1e-15);
        let ex3 = get(3, 1.0, 1e3);
        assert!((ex3.q(p) - (ex3.u(p, RegionId::Region1) - ex3.u(p, RegionId::Region2))).abs() < 1e-15);
        assert_eq!(ex3.q(Point2::new(0.5, 0.0)), -1.0);
    }

    #[test]
    fn boundary_values_vanish() {
        for id in [1, 2, 3] {
            let ex = get(id, 1e-4, 1.0);
            for k in 0..=20 {
                let s = -1.0 + 0.1 * k as f64;
                for p in [Point2::new(s, -1.0), Point2::new(s, 1.0), Point2::new(-1.0, s), Point2::new(1.0, s)] {
                    assert_eq!(ex.levelset.region(p), Some(RegionId::Region1));
                    assert!(ex.u(p, RegionId::Region1).abs() < 1e-11);
                }
            }
        }
    }

    #[test]
    fn unknown_example() {
        let reg = exact_registry();
        assert!(matches!(reg.get(4, 1.0, 1.0, &LevelSetParams::default()), Err(Error::UnknownExample(_))));
        assert!(reg.get(1, 0.0, 1.0, &LevelSetParams::default()).is_err());
    }
}
