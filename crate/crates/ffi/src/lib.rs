//! C ABI for `fitmg`.
//!
//! Objects are opaque heap handles created by `fitmg_*_new`/`fitmg_solve*`
//! and released with the matching `*_free`. Every fallible call returns a
//! [`FitmgStatus`]; on failure the message is kept per thread and can be read
//! with [`fitmg_last_error_message`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fitmg::geometry::{builtin_levelsets, LevelSet, LevelSetParams, RegionId};
use fitmg::harness::{cells_for, compute_errors, solve_problem, ErrorConvention, ProblemSpec, RunConfig, SolverChoice};
use fitmg::meshgen::{fit_mesh, make_uniform_mesh, FitOptions, FittedMesh};
use fitmg::quality::audit_fitted_mesh;
use fitmg::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitmgStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownLevelSet = 3,
    UnknownExample = 4,
    MeshTooCoarse = 5,
    Singular = 6,
    NoConvergence = 7,
    BufferTooSmall = 8,
    /// Any other numerical or geometric failure.
    Numerical = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitmgSolver {
    Multigrid = 0,
    ConjugateGradient = 1,
    Direct = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitmgRegion {
    /// `phi > 0`
    Region1 = 1,
    /// `phi < 0`
    Region2 = 2,
}

/// Fitted mesh handle.
pub struct FitmgMesh {
    mesh: FittedMesh,
}

/// Solution handle; keeps the mesh and the problem it solved.
pub struct FitmgSolution {
    sol: fitmg::harness::Solution,
    spec: ProblemSpec,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitmgQuality {
    pub min_angle: f64,
    pub max_angle: f64,
    pub worst_rdp_psi: f64,
    pub triangle_violations: usize,
    pub quad_violations: usize,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct FitmgErrors {
    pub l2: f64,
    pub h1: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> FitmgStatus {
    match e {
        Error::InvalidArgument(_) | Error::Expression(_) | Error::Dimension(_) => FitmgStatus::InvalidArgument,
        Error::UnknownLevelSet(_) => FitmgStatus::UnknownLevelSet,
        Error::UnknownExample(_) => FitmgStatus::UnknownExample,
        Error::MeshTooCoarse(_) => FitmgStatus::MeshTooCoarse,
        Error::Singular(_) => FitmgStatus::Singular,
        Error::NoConvergence { .. } => FitmgStatus::NoConvergence,
        Error::Io(_) => FitmgStatus::Io,
        _ => FitmgStatus::Numerical,
    }
}

struct Fail(FitmgStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, records any failure and turns panics into `Panic`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> FitmgStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            FitmgStatus::Ok
        }
        Ok(Err(Fail(s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            FitmgStatus::Panic
        }
    }
}

fn null(what: &str) -> Fail {
    Fail(FitmgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(FitmgStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Fail> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn copy_out(src: &[f64], out: *mut f64, len: usize) -> Result<(), Fail> {
    if len < src.len() {
        return Err(Fail(
            FitmgStatus::BufferTooSmall,
            format!("buffer holds {len} values, {} needed", src.len()),
        ));
    }
    if out.is_null() {
        return Err(null("output buffer"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), out, src.len());
    Ok(())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fitmg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null. Valid until the
/// next fitmg call on the same thread.
#[no_mangle]
pub extern "C" fn fitmg_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

fn build_mesh(ls: &LevelSet, n: usize) -> Result<FitmgMesh, Fail> {
    Ok(FitmgMesh { mesh: fit_mesh(&make_uniform_mesh(n)?, ls, &FitOptions::default())? })
}

/// Fits the `n x n` structured grid of `[-1, 1]^2` to a builtin interface
/// (`circle`, `cardioid`, `fivestar-circle`, ...). `radius` is used by
/// `circle` only.
///
/// # Safety
/// `levelset` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_new(
    levelset: *const c_char,
    radius: f64,
    n: usize,
    out: *mut *mut FitmgMesh,
) -> FitmgStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let ls = builtin_levelsets().lookup(read_str(levelset, "levelset")?, &LevelSetParams { radius })?;
        *out = Box::into_raw(Box::new(build_mesh(&ls, n)?));
        Ok(())
    })
}

/// Like [`fitmg_mesh_new`] with the level set given as an expression in
/// `x` and `y`, e.g. `"x^2 + y^2 - 0.25"`.
///
/// # Safety
/// `expr` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_new_expr(expr: *const c_char, n: usize, out: *mut *mut FitmgMesh) -> FitmgStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let ls = LevelSet::from_expr("expr", read_str(expr, "expr")?)?;
        *out = Box::into_raw(Box::new(build_mesh(&ls, n)?));
        Ok(())
    })
}

/// # Safety
/// `mesh` must come from `fitmg_mesh_new*` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_free(mesh: *mut FitmgMesh) {
    if !mesh.is_null() {
        drop(Box::from_raw(mesh));
    }
}

/// # Safety
/// `mesh` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_n_vertices(mesh: *const FitmgMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.n_vertices())
}

/// # Safety
/// `mesh` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_n_elements(mesh: *const FitmgMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.elements.len())
}

/// # Safety
/// `mesh` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_n_quads(mesh: *const FitmgMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.n_quads())
}

/// # Safety
/// `mesh` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_n_interface_nodes(mesh: *const FitmgMesh) -> usize {
    mesh.as_ref().map_or(0, |m| m.mesh.interface_nodes.len())
}

/// Copies vertex coordinates as `x0, y0, x1, y1, ...`; `len` must be at
/// least twice the vertex count.
///
/// # Safety
/// `mesh` must be a live handle and `xy` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_vertices(mesh: *const FitmgMesh, xy: *mut f64, len: usize) -> FitmgStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        let flat: Vec<f64> = m.mesh.vertices.iter().flat_map(|p| [p.x, p.y]).collect();
        copy_out(&flat, xy, len)
    })
}

/// Angle audit with minimum-angle parameter `alpha` (radians).
///
/// # Safety
/// `mesh` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fitmg_mesh_quality(mesh: *const FitmgMesh, alpha: f64, out: *mut FitmgQuality) -> FitmgStatus {
    guard(|| {
        let m = mesh.as_ref().ok_or_else(|| null("mesh"))?;
        let out = out_ref(out, "out")?;
        if !(alpha > 0.0 && alpha < std::f64::consts::FRAC_PI_2) {
            return Err(Fail(FitmgStatus::InvalidArgument, format!("alpha {alpha} outside (0, pi/2)")));
        }
        let r = audit_fitted_mesh(&m.mesh, alpha);
        *out = FitmgQuality {
            min_angle: r.min_angle,
            max_angle: r.max_angle,
            worst_rdp_psi: r.worst_rdp_psi,
            triangle_violations: r.count_triangle_violations(),
            quad_violations: r.count_quad_violations(),
        };
        Ok(())
    })
}

/// Solves manufactured example `example` (1, 2 or 3) with coefficients
/// `beta1` on `phi > 0` and `beta2` on `phi < 0` at mesh size `h = 1/inv_h`.
/// The multigrid solver uses an 8 x 8 coarse grid and needs `inv_h` to be
/// a power of two of at least 4.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fitmg_solve_example(
    example: u32,
    beta1: f64,
    beta2: f64,
    inv_h: usize,
    solver: FitmgSolver,
    out: *mut *mut FitmgSolution,
) -> FitmgStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let spec = ProblemSpec::example(example, beta1, beta2)?;
        let solver = match solver {
            FitmgSolver::Multigrid => SolverChoice::Mg,
            FitmgSolver::ConjugateGradient => SolverChoice::Cg,
            FitmgSolver::Direct => SolverChoice::Direct,
        };
        let cfg = RunConfig { solver, ..RunConfig::default() };
        let sol = solve_problem(&spec, cells_for(inv_h), &cfg)?;
        *out = Box::into_raw(Box::new(FitmgSolution { sol, spec }));
        Ok(())
    })
}

/// # Safety
/// `sol` must come from `fitmg_solve_example` and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fitmg_solution_free(sol: *mut FitmgSolution) {
    if !sol.is_null() {
        drop(Box::from_raw(sol));
    }
}

/// # Safety
/// `sol` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn fitmg_solution_n_vertices(sol: *const FitmgSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.sol.mesh.n_vertices())
}

/// Iterations of the iterative solver, 0 for the direct one.
///
/// # Safety
/// `sol` must be a live handle or null (which yields 0).
#[no_mangle]
pub unsafe extern "C" fn fitmg_solution_iterations(sol: *const FitmgSolution) -> usize {
    sol.as_ref().map_or(0, |s| s.sol.iterations)
}

/// Nodal values of the solution seen from `region`; they differ only at
/// interface nodes, by the prescribed jump.
///
/// # Safety
/// `sol` must be a live handle and `values` must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fitmg_solution_values(
    sol: *const FitmgSolution,
    region: FitmgRegion,
    values: *mut f64,
    len: usize,
) -> FitmgStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        let r = match region {
            FitmgRegion::Region1 => RegionId::Region1,
            FitmgRegion::Region2 => RegionId::Region2,
        };
        let uh = &s.sol.uh;
        let v: Vec<f64> = (0..uh.len()).map(|i| uh.value(i, r)).collect();
        copy_out(&v, values, len)
    })
}

/// L2 and broken H1 errors against the exact solution.
///
/// # Safety
/// `sol` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn fitmg_solution_errors(sol: *const FitmgSolution, out: *mut FitmgErrors) -> FitmgStatus {
    guard(|| {
        let s = sol.as_ref().ok_or_else(|| null("solution"))?;
        let out = out_ref(out, "out")?;
        let exact = s
            .spec
            .exact()?
            .ok_or_else(|| Fail(FitmgStatus::InvalidArgument, "no exact solution".into()))?;
        let e = compute_errors(&s.sol.uh, &exact, &s.sol.mesh, ErrorConvention::default())?;
        *out = FitmgErrors { l2: e.l2, h1: e.h1 };
        Ok(())
    })
}
