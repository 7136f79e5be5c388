use faer::linalg::solvers::Solve;
use faer::sparse::linalg::LltError;
use faer::sparse::linalg::solvers::Llt;
use faer::sparse::{SparseColMatRef, SymbolicSparseColMatRef};
use faer::{MatMut, Side};

use super::SparseMatrix;
use crate::error::{Error, Result};

/// Sparse Cholesky factorization with a fill-reducing ordering.
#[derive(Debug, Clone)]
pub struct SpdFactor {
    llt: Llt<usize, f64>,
    n: usize,
}

impl SpdFactor {
    pub fn new(a: &SparseMatrix) -> Result<Self> {
        let n = a.n_rows();
        if a.n_cols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.n_cols(),
            });
        }
        // CSR of a symmetric matrix is its own CSC; only the lower half is read
        let symbolic = SymbolicSparseColMatRef::new_checked(n, n, a.row_ptr(), None, a.col_idx());
        let mat = SparseColMatRef::new(symbolic, a.values());
        let llt = mat.sp_cholesky(Side::Lower).map_err(|e| match e {
            LltError::Numeric(faer::linalg::cholesky::llt::factor::LltError::NonPositivePivot { index }) => {
                Error::NotPositiveDefinite(index)
            }
            LltError::Generic(g) => Error::Factorization(format!("{g:?}")),
        })?;
        Ok(SpdFactor { llt, n })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        if self.n == 0 {
            return;
        }
        let rhs = MatMut::from_column_major_slice_mut(x, self.n, 1);
        self.llt.solve_in_place(rhs);
    }

    /// Solves for every length-`dim` column of the column-major block `x`.
    pub fn solve_columns(&self, x: &mut [f64]) {
        assert_eq!(x.len() % self.n.max(1), 0);
        if self.n == 0 || x.is_empty() {
            return;
        }
        let cols = x.len() / self.n;
        let rhs = MatMut::from_column_major_slice_mut(x, self.n, cols);
        self.llt.solve_in_place(rhs);
    }
}

/// Solves `A x = b` for symmetric positive definite `A` and checks the
/// residual.
pub fn solve_spd(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if b.len() != a.n_rows() {
        return Err(Error::DimensionMismatch {
            expected: a.n_rows(),
            got: b.len(),
        });
    }
    let factor = SpdFactor::new(a)?;
    let x = factor.solve(b);
    let r = a.mul_vec(&x);
    let res: f64 = r.iter().zip(b).map(|(r, b)| (r - b) * (r - b)).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(res <= 1e-10 * nb.max(f64::MIN_POSITIVE)) && res > 0.0 {
        return Err(Error::Factorization(format!(
            "residual {res:.3e} exceeds 1e-10 relative to |b| = {nb:.3e}"
        )));
    }
    Ok(x)
}
