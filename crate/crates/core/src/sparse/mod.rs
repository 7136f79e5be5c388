//! Sparse symmetric matrices, a direct SPD solver, the Kronecker-sum operator
//! and preconditioned MINRES.

mod cholesky;
mod kron;
mod matrix;
mod minres;

pub use cholesky::{solve_spd, SpdFactor};
pub use kron::{KroneckerSumOperator, MeanPreconditioner};
pub use matrix::{SparseMatrix, TripletBuilder};
pub use minres::{minres, MinresResult};

/// A symmetric linear operator applied matrix-free.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

/// Action of the inverse of a symmetric positive definite preconditioner.
pub trait Preconditioner: Sync {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]);
}

impl LinearOperator for SparseMatrix {
    fn dim(&self) -> usize {
        self.n_rows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.mul_vec_into(x, y);
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct IdentityPreconditioner;

impl Preconditioner for IdentityPreconditioner {
    fn apply_inverse(&self, r: &[f64], z: &mut [f64]) {
        z.copy_from_slice(r);
    }
}
