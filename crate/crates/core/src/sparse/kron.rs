use rayon::prelude::*;

use super::{LinearOperator, Preconditioner, SparseMatrix, SpdFactor};
use crate::error::{Error, Result};

/// The implicit operator `Σ_m G_m ⊗ K_m`.
///
/// Vectors are stored block by block: block `t` (length `N_X`) holds the
/// spatial coefficients paired with parametric basis function `t`.
#[derive(Debug, Clone)]
pub struct KroneckerSumOperator {
    terms: Vec<(SparseMatrix, SparseMatrix)>,
    n_p: usize,
    n_x: usize,
}

impl KroneckerSumOperator {
    /// The first term's `G` must be the identity.
    pub fn new(terms: Vec<(SparseMatrix, SparseMatrix)>) -> Result<Self> {
        let Some((g0, k0)) = terms.first() else {
            return Err(Error::InvalidArgument("Kronecker sum needs at least one term".into()));
        };
        let (n_p, n_x) = (g0.n_rows(), k0.n_rows());
        for (g, k) in &terms {
            for (dim, want) in [(g.n_rows(), n_p), (g.n_cols(), n_p), (k.n_rows(), n_x), (k.n_cols(), n_x)] {
                if dim != want {
                    return Err(Error::DimensionMismatch { expected: want, got: dim });
                }
            }
        }
        if *g0 != SparseMatrix::identity(n_p) {
            return Err(Error::InvalidArgument("first Kronecker term must have G = I".into()));
        }
        Ok(KroneckerSumOperator { terms, n_p, n_x })
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }

    pub fn n_x(&self) -> usize {
        self.n_x
    }

    pub fn terms(&self) -> &[(SparseMatrix, SparseMatrix)] {
        &self.terms
    }

    /// `y = (Σ_m G_m ⊗ K_m) x`, parallel over output blocks.
    pub fn kron_matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let n = self.n_p * self.n_x;
        if x.len() != n {
            return Err(Error::DimensionMismatch { expected: n, got: x.len() });
        }
        let mut y = vec![0.0; n];
        self.apply(x, &mut y);
        Ok(y)
    }

    /// Explicit dense matrix; for tests on small instances.
    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.n_p * self.n_x;
        let mut a = vec![vec![0.0; n]; n];
        for (g, k) in &self.terms {
            for t in 0..self.n_p {
                for (j, gv) in g.row(t) {
                    for s in 0..self.n_x {
                        for (i, kv) in k.row(s) {
                            a[t * self.n_x + s][j * self.n_x + i] += gv * kv;
                        }
                    }
                }
            }
        }
        a
    }
}

impl LinearOperator for KroneckerSumOperator {
    fn dim(&self) -> usize {
        self.n_p * self.n_x
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n_x = self.n_x;
        y.par_chunks_mut(n_x.max(1)).enumerate().for_each_init(
            || vec![0.0; n_x],
            |work, (t, yt)| {
                yt.iter_mut().for_each(|v| *v = 0.0);
                for (g, k) in &self.terms {
                    let mut any = false;
                    work.iter_mut().for_each(|v| *v = 0.0);
                    for (j, gv) in g.row(t) {
                        any = true;
                        let xj = &x[j * n_x..(j + 1) * n_x];
                        work.iter_mut().zip(xj).for_each(|(w, xv)| *w += gv * xv);
                    }
                    if any {
                        k.mul_vec_add(1.0, work, yt);
                    }
                }
            },
        );
    }
}

/// The mean-based preconditioner `I ⊗ K_0`.
#[derive(Debug, Clone)]
pub struct MeanPreconditioner {
    factor: SpdFactor,
    n_p: usize,
}

impl MeanPreconditioner {
    pub fn new(k0: &SparseMatrix, n_p: usize) -> Result<Self> {
        Ok(MeanPreconditioner {
            factor: SpdFactor::new(k0)?,
            n_p,
        })
    }

    pub fn from_factor(factor: SpdFactor, n_p: usize) -> Self {
        MeanPreconditioner { factor, n_p }
    }

    pub fn factor(&self) -> &SpdFactor {
        &self.factor
    }

    pub fn n_p(&self) -> usize {
        self.n_p
    }
}

impl Preconditioner for MeanPreconditioner {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
        self.factor.solve_columns(z);
    }
}
