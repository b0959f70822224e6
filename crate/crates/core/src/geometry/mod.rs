//! Level-set interfaces and interface/edge intersection.
//!
//! The interface is the zero set of a scalar field `phi`; `phi > 0` selects
//! region 1 and `phi < 0` region 2.

mod expr;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

pub use expr::Expr;

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn dot(self, other: Point2) -> f64 {
        self.x * other.x + self.y * other.y
    }

    /// z-component of the 2D cross product.
    pub fn cross(self, other: Point2) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn dist(self, other: Point2) -> f64 {
        (self - other).norm()
    }

    pub fn lerp(self, other: Point2, t: f64) -> Point2 {
        Point2::new(
            self.x + t * (other.x - self.x),
            self.y + t * (other.y - self.y),
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

impl Add for Point2 {
    type Output = Point2;
    fn add(self, o: Point2) -> Point2 {
        Point2::new(self.x + o.x, self.y + o.y)
    }
}

impl Sub for Point2 {
    type Output = Point2;
    fn sub(self, o: Point2) -> Point2 {
        Point2::new(self.x - o.x, self.y - o.y)
    }
}

impl Mul<Point2> for f64 {
    type Output = Point2;
    fn mul(self, p: Point2) -> Point2 {
        Point2::new(self * p.x, self * p.y)
    }
}

/// Twice the signed area of the triangle `abc` (positive when counterclockwise).
pub fn orient(a: Point2, b: Point2, c: Point2) -> f64 {
    (b - a).cross(c - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RegionId {
    /// `phi > 0`
    Region1,
    /// `phi < 0`
    Region2,
}

impl RegionId {
    pub fn from_sign(value: f64) -> Option<RegionId> {
        if value > 0.0 {
            Some(RegionId::Region1)
        } else if value < 0.0 {
            Some(RegionId::Region2)
        } else {
            None
        }
    }

    pub fn index(self) -> usize {
        match self {
            RegionId::Region1 => 0,
            RegionId::Region2 => 1,
        }
    }

    pub fn tag(self) -> i32 {
        self.index() as i32 + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Region(RegionId),
    OnInterface,
}

type Field = dyn Fn(Point2) -> f64 + Send + Sync;

/// A named scalar field whose zero set is the interface.
#[derive(Clone)]
pub struct LevelSet {
    name: String,
    params: Vec<(String, f64)>,
    func: Arc<Field>,
}

impl fmt::Debug for LevelSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LevelSet")
            .field("name", &self.name)
            .field("params", &self.params)
            .finish()
    }
}

impl LevelSet {
    pub fn new<F>(name: impl Into<String>, func: F) -> Self
    where
        F: Fn(Point2) -> f64 + Send + Sync + 'static,
    {
        Self {
            name: name.into(),
            params: Vec::new(),
            func: Arc::new(func),
        }
    }

    pub fn with_param(mut self, name: impl Into<String>, value: f64) -> Self {
        self.params.push((name.into(), value));
        self
    }

    /// Parses a user expression in `x` and `y`.
    pub fn from_expr(name: impl Into<String>, source: &str) -> Result<Self> {
        let expr = Expr::parse(source)?;
        Ok(Self::new(name, move |p| expr.eval(p.x, p.y)))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[(String, f64)] {
        &self.params
    }

    pub fn param(&self, name: &str) -> Option<f64> {
        self.params
            .iter()
            .find(|(n, _)| n == name)
            .map(|&(_, v)| v)
    }

    /// Raw evaluation; may return a non-finite value.
    #[inline]
    pub fn eval(&self, p: Point2) -> f64 {
        (self.func)(p)
    }

    pub fn try_eval(&self, p: Point2) -> Result<f64> {
        let v = self.eval(p);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Evaluation {
                name: self.name.clone(),
                point: p,
            })
        }
    }

    pub fn region(&self, p: Point2) -> Option<RegionId> {
        RegionId::from_sign(self.eval(p))
    }
}

pub fn side(ls: &LevelSet, p: Point2, snap_tol: f64) -> Result<Side> {
    let v = ls.try_eval(p)?;
    if v.abs() <= snap_tol {
        return Ok(Side::OnInterface);
    }
    Ok(Side::Region(if v > 0.0 {
        RegionId::Region1
    } else {
        RegionId::Region2
    }))
}

/// Parameters of the edge root locator.
#[derive(Debug, Clone, Copy)]
pub struct RootOptions {
    /// Uniform sign-change scan resolution on `[0, 1]`.
    pub subdivisions: usize,
    /// Bisection stops when the bracket is shorter than this (in `t`).
    pub rel_tol: f64,
    /// Roots within this distance (in `t`) of an endpoint snap to it.
    pub snap_tol: f64,
    /// More roots than this is a `MeshTooCoarse` error.
    pub max_roots: usize,
}

impl Default for RootOptions {
    fn default() -> Self {
        Self {
            subdivisions: 8,
            rel_tol: 1e-12,
            snap_tol: 1e-9,
            max_roots: 2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeRoot {
    pub t: f64,
    pub point: Point2,
}

/// Roots of `t -> phi((1-t) a + t b)` on `[0, 1]`, sorted by `t`.
pub fn edge_intersections(
    ls: &LevelSet,
    a: Point2,
    b: Point2,
    opts: &RootOptions,
) -> Result<Vec<EdgeRoot>> {
    if a == b {
        return Err(Error::InvalidArgument(
            "edge endpoints coincide".to_string(),
        ));
    }
    let ts = scan_roots(ls, a, b, opts)?;
    if ts.len() > opts.max_roots {
        return Err(Error::MeshTooCoarse(format!(
            "{} crossings of `{}` on edge ({}, {})-({}, {})",
            ts.len(),
            ls.name(),
            a.x,
            a.y,
            b.x,
            b.y
        )));
    }
    Ok(ts
        .into_iter()
        .map(|t| EdgeRoot {
            t,
            point: a.lerp(b, t),
        })
        .collect())
}

/// Bracketing scan plus bisection without any limit on the root count.
pub(crate) fn scan_roots(
    ls: &LevelSet,
    a: Point2,
    b: Point2,
    opts: &RootOptions,
) -> Result<Vec<f64>> {
    let m = opts.subdivisions.max(1);
    let at = |t: f64| ls.try_eval(a.lerp(b, t));
    let mut samples = Vec::with_capacity(m + 1);
    for k in 0..=m {
        samples.push(at(k as f64 / m as f64)?);
    }

    let mut roots = Vec::new();
    for k in 0..=m {
        if samples[k] == 0.0 {
            roots.push(k as f64 / m as f64);
        }
        if k < m && samples[k] * samples[k + 1] < 0.0 {
            let (mut lo, mut hi) = (k as f64 / m as f64, (k + 1) as f64 / m as f64);
            let mut f_lo = samples[k];
            while hi - lo > opts.rel_tol {
                let mid = 0.5 * (lo + hi);
                let f_mid = at(mid)?;
                if f_mid == 0.0 {
                    lo = mid;
                    hi = mid;
                    break;
                }
                if f_lo * f_mid < 0.0 {
                    hi = mid;
                } else {
                    lo = mid;
                    f_lo = f_mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
    }

    for t in roots.iter_mut() {
        if *t <= opts.snap_tol {
            *t = 0.0;
        } else if *t >= 1.0 - opts.snap_tol {
            *t = 1.0;
        }
    }
    roots.sort_by(f64::total_cmp);
    roots.dedup_by(|later, earlier| (*later - *earlier).abs() <= opts.snap_tol);
    Ok(roots)
}

/// Parameters accepted by the builtin constructors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSetParams {
    pub radius: f64,
}

impl Default for LevelSetParams {
    fn default() -> Self {
        Self { radius: 0.5 }
    }
}

pub type LevelSetConstructor = Arc<dyn Fn(&LevelSetParams) -> LevelSet + Send + Sync>;

#[derive(Clone, Default)]
pub struct LevelSetRegistry {
    entries: BTreeMap<String, LevelSetConstructor>,
}

impl LevelSetRegistry {
    pub fn register<F>(&mut self, name: impl Into<String>, ctor: F)
    where
        F: Fn(&LevelSetParams) -> LevelSet + Send + Sync + 'static,
    {
        self.entries.insert(name.into(), Arc::new(ctor));
    }

    pub fn lookup(&self, name: &str, params: &LevelSetParams) -> Result<LevelSet> {
        self.entries
            .get(name)
            .map(|ctor| ctor(params))
            .ok_or_else(|| Error::UnknownLevelSet(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }
}

pub fn circle(r: f64) -> LevelSet {
    LevelSet::new("circle", move |p| p.x * p.x + p.y * p.y - r * r).with_param("r", r)
}

pub fn cardioid() -> LevelSet {
    LevelSet::new("cardioid", |p| {
        let x = p.x + 0.5;
        let rho = x * x + p.y * p.y;
        let w = rho - 0.5 * x;
        w * w - 0.25 * rho
    })
}

/// Five-pointed star about (-0.5, 0) times a circle of radius 0.3 about
/// (0.5, 0); radii are Euclidean distances.
pub fn fivestar_circle() -> LevelSet {
    LevelSet::new("fivestar-circle", |p| {
        let (dx, dy) = (p.x + 0.5, p.y);
        let rho1 = dx.hypot(dy);
        let theta = dy.atan2(dx);
        let rho2 = (p.x - 0.5).hypot(p.y);
        (rho1 - 0.3 - 0.09 * (5.0 * theta).sin()) * (rho2 * rho2 - 0.09)
    })
}

/// The same product with squared distances in place of the radii. Its zero
/// set leaves the square and the two curves cross each other.
pub fn fivestar_circle_literal() -> LevelSet {
    LevelSet::new("fivestar-circle-literal", |p| {
        let (dx, dy) = (p.x + 0.5, p.y);
        let rho1 = dx * dx + dy * dy;
        let theta = dy.atan2(dx);
        let rho2 = (p.x - 0.5) * (p.x - 0.5) + p.y * p.y;
        (rho1 - 0.3 - 0.09 * (5.0 * theta).sin()) * (rho2 * rho2 - 0.09)
    })
}

/// Straight interface `x = c`.
pub fn vertical_line(c: f64) -> LevelSet {
    LevelSet::new("line", move |p| p.x - c).with_param("c", c)
}

pub fn builtin_levelsets() -> LevelSetRegistry {
    let mut reg = LevelSetRegistry::default();
    reg.register("circle", |p| circle(p.radius));
    reg.register("cardioid", |_| cardioid());
    reg.register("fivestar-circle", |_| fivestar_circle());
    reg.register("fivestar-circle-literal", |_| fivestar_circle_literal());
    reg.register("line", |_| vertical_line(0.0));
    reg
}
