//! Baseline solvers: sparse Cholesky and unpreconditioned CG.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Col, Side};

use crate::error::{Error, Result};
use crate::sparse::{dot, norm2, CsrMatrix};

/// Sparse Cholesky factorization of a symmetric positive definite matrix.
pub struct Cholesky {
    n: usize,
    llt: Option<Llt<usize, f64>>,
}

impl std::fmt::Debug for Cholesky {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Cholesky").field("n", &self.n).finish()
    }
}

impl Cholesky {
    pub fn new(a: &CsrMatrix) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("{}x{} is not square", n, a.ncols())));
        }
        if n == 0 {
            return Ok(Self { n, llt: None });
        }
        let t: Vec<Triplet<usize, usize, f64>> = a
            .triplets()
            .filter(|&(i, j, _)| i >= j)
            .map(|(i, j, v)| Triplet::new(i, j, v))
            .collect();
        let m = SparseColMat::<usize, f64>::try_new_from_triplets(n, n, &t)
            .map_err(|e| Error::Singular(format!("{e:?}")))?;
        let llt = m
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Singular(format!("{e:?}")))?;
        Ok(Self { n, llt: Some(llt) })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve_in_place(&self, b: &mut [f64]) {
        assert_eq!(b.len(), self.n);
        let Some(llt) = &self.llt else { return };
        let mut col = Col::<f64>::from_fn(self.n, |i| b[i]);
        llt.solve_in_place(col.as_mut());
        for (i, x) in b.iter_mut().enumerate() {
            *x = col[i];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

pub fn solve_direct(a: &CsrMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.nrows() {
        return Err(Error::Dimension(format!("rhs {} vs matrix {}", b.len(), a.nrows())));
    }
    Ok(Cholesky::new(a)?.solve(b))
}

/// Conjugate gradients from zero until `|r| <= tol |b|`. Returns the
/// solution and the iteration count.
pub fn solve_cg(a: &CsrMatrix, b: &[f64], tol: f64, max_iters: usize) -> Result<(Vec<f64>, usize)> {
    let n = b.len();
    let mut x = vec![0.0; n];
    let bnorm = norm2(b);
    if bnorm == 0.0 {
        return Ok((x, 0));
    }
    let mut r = b.to_vec();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rr = dot(&r, &r);
    for it in 1..=max_iters {
        a.matvec(&p, &mut ap);
        let pap = dot(&p, &ap);
        if pap <= 0.0 {
            return Err(Error::Singular("CG met a non-positive curvature".into()));
        }
        let alpha = rr / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bnorm {
            return Ok((x, it));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iters,
        residual: rr.sqrt() / bnorm,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i > 0 {
                t.push((i, i - 1, -1.0));
                t.push((i - 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &t)
    }

    #[test]
    fn identity_system() {
        let a = CsrMatrix::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        assert_eq!(solve_direct(&a, &b).unwrap(), b.to_vec());
        let (x, it) = solve_cg(&a, &b, 1e-12, 10).unwrap();
        assert_eq!(it, 1);
        for (u, v) in x.iter().zip(b) {
            assert!((u - v).abs() < 1e-15);
        }
    }

    #[test]
    fn laplacian_against_closed_form() {
        // -u'' = 1 on a uniform grid is solved exactly by the discrete
        // parabola i (n + 1 - i) / 2
        let n = 50;
        let a = laplace_1d(n);
        let b = vec![1.0; n];
        let want: Vec<f64> = (1..=n).map(|i| (i * (n + 1 - i)) as f64 / 2.0).collect();
        let x = solve_direct(&a, &b).unwrap();
        let (y, _) = solve_cg(&a, &b, 1e-13, 200).unwrap();
        for i in 0..n {
            assert!((x[i] - want[i]).abs() < 1e-9 * want[i]);
            assert!((y[i] - want[i]).abs() < 1e-8 * want[i]);
        }
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let a = CsrMatrix::from_dense(&[vec![1.0, 2.0], vec![2.0, 1.0]]);
        assert!(matches!(solve_direct(&a, &[1.0, 1.0]), Err(Error::Singular(_))));
    }

    #[test]
    fn cg_reports_no_convergence() {
        let a = laplace_1d(100);
        let b = vec![1.0; 100];
        assert!(matches!(
            solve_cg(&a, &b, 1e-14, 3),
            Err(Error::NoConvergence { iterations: 3, .. })
        ));
    }
}
