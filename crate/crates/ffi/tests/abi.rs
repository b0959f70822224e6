use std::ffi::{CStr, CString};
use std::ptr;

use fitmg_ffi::*;

fn last_error() -> String {
    let p = fitmg_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_matches_crate() {
    let v = unsafe { CStr::from_ptr(fitmg_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn mesh_round_trip() {
    let name = CString::new("circle").unwrap();
    let mut mesh = ptr::null_mut();
    unsafe {
        assert_eq!(fitmg_mesh_new(name.as_ptr(), 0.5, 16, &mut mesh), FitmgStatus::Ok);
        assert!(fitmg_last_error_message().is_null());
        let nv = fitmg_mesh_n_vertices(mesh);
        assert!(nv > 17 * 17);
        assert!(fitmg_mesh_n_interface_nodes(mesh) > 0);
        assert!(fitmg_mesh_n_elements(mesh) > fitmg_mesh_n_quads(mesh));

        let mut xy = vec![0.0; 2 * nv];
        assert_eq!(fitmg_mesh_vertices(mesh, xy.as_mut_ptr(), xy.len()), FitmgStatus::Ok);
        assert!(xy.iter().all(|v| v.abs() <= 1.0));
        assert_eq!(fitmg_mesh_vertices(mesh, xy.as_mut_ptr(), 3), FitmgStatus::BufferTooSmall);
        assert!(last_error().contains("needed"));

        let mut q = FitmgQuality::default();
        assert_eq!(fitmg_mesh_quality(mesh, std::f64::consts::FRAC_PI_4, &mut q), FitmgStatus::Ok);
        assert_eq!((q.triangle_violations, q.quad_violations), (0, 0));
        assert_eq!(fitmg_mesh_quality(mesh, 2.0, &mut q), FitmgStatus::InvalidArgument);
        fitmg_mesh_free(mesh);
    }
}

#[test]
fn expression_mesh_matches_builtin_circle() {
    let expr = CString::new("x^2 + y^2 - 0.25").unwrap();
    let name = CString::new("circle").unwrap();
    let (mut a, mut b) = (ptr::null_mut(), ptr::null_mut());
    unsafe {
        assert_eq!(fitmg_mesh_new_expr(expr.as_ptr(), 32, &mut a), FitmgStatus::Ok);
        assert_eq!(fitmg_mesh_new(name.as_ptr(), 0.5, 32, &mut b), FitmgStatus::Ok);
        assert_eq!(fitmg_mesh_n_vertices(a), fitmg_mesh_n_vertices(b));
        assert_eq!(fitmg_mesh_n_elements(a), fitmg_mesh_n_elements(b));
        fitmg_mesh_free(a);
        fitmg_mesh_free(b);
    }
}

#[test]
fn error_codes() {
    let mut mesh = ptr::null_mut();
    let bad = CString::new("hexagon").unwrap();
    unsafe {
        assert_eq!(fitmg_mesh_new(bad.as_ptr(), 0.5, 16, &mut mesh), FitmgStatus::UnknownLevelSet);
        assert!(mesh.is_null());
        assert!(last_error().contains("hexagon"));
        assert_eq!(fitmg_mesh_new(ptr::null(), 0.5, 16, &mut mesh), FitmgStatus::NullPointer);
        let expr = CString::new("x +* y").unwrap();
        assert_eq!(fitmg_mesh_new_expr(expr.as_ptr(), 16, &mut mesh), FitmgStatus::InvalidArgument);

        let mut sol = ptr::null_mut();
        assert_eq!(fitmg_solve_example(7, 1.0, 1.0, 16, FitmgSolver::Direct, &mut sol), FitmgStatus::UnknownExample);
        assert_eq!(fitmg_solve_example(1, -1.0, 1.0, 16, FitmgSolver::Direct, &mut sol), FitmgStatus::InvalidArgument);
        assert_eq!(fitmg_solve_example(1, 1.0, 1.0, 12, FitmgSolver::Multigrid, &mut sol), FitmgStatus::InvalidArgument);
        assert!(sol.is_null());
        assert_eq!(fitmg_solution_n_vertices(ptr::null()), 0);
        fitmg_mesh_free(ptr::null_mut());
        fitmg_solution_free(ptr::null_mut());
    }
}

#[test]
fn solve_and_read_back() {
    unsafe {
        let mut mg = ptr::null_mut();
        let mut direct = ptr::null_mut();
        assert_eq!(fitmg_solve_example(2, 10.0, 1.0, 16, FitmgSolver::Multigrid, &mut mg), FitmgStatus::Ok);
        assert_eq!(fitmg_solve_example(2, 10.0, 1.0, 16, FitmgSolver::Direct, &mut direct), FitmgStatus::Ok);
        assert!(fitmg_solution_iterations(mg) > 0);
        assert_eq!(fitmg_solution_iterations(direct), 0);

        let n = fitmg_solution_n_vertices(mg);
        let mut u1 = vec![0.0; n];
        let mut u2 = vec![0.0; n];
        let mut d1 = vec![0.0; n];
        assert_eq!(fitmg_solution_values(mg, FitmgRegion::Region1, u1.as_mut_ptr(), n), FitmgStatus::Ok);
        assert_eq!(fitmg_solution_values(mg, FitmgRegion::Region2, u2.as_mut_ptr(), n), FitmgStatus::Ok);
        assert_eq!(fitmg_solution_values(direct, FitmgRegion::Region1, d1.as_mut_ptr(), n), FitmgStatus::Ok);
        assert!(u1.iter().zip(&d1).all(|(a, b)| (a - b).abs() < 1e-7));
        // the two sides differ by a jump of 5 plus a small smooth part
        let jumps: Vec<f64> = u1.iter().zip(&u2).map(|(a, b)| a - b).filter(|j| *j != 0.0).collect();
        assert!(!jumps.is_empty() && jumps.iter().all(|j| (j + 5.0).abs() < 1.0));

        let mut e = FitmgErrors::default();
        assert_eq!(fitmg_solution_errors(mg, &mut e), FitmgStatus::Ok);
        assert!(e.l2 > 0.0 && e.l2 < 1e-2 && e.h1 < 0.5);
        fitmg_solution_free(mg);
        fitmg_solution_free(direct);
    }
}
