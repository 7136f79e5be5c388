use super::{LinearOperator, Preconditioner};
use crate::error::{Error, Result};

/// Lanczos breakdown threshold, relative to the initial residual norm.
const BREAKDOWN_TOL: f64 = 1e-14;

#[derive(Debug, Clone)]
pub struct MinresResult {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// Preconditioned residual norm before the first and after every iteration.
    pub residual_history: Vec<f64>,
    /// False when `maxit` was reached first.
    pub converged: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Preconditioned MINRES with a zero initial guess.
///
/// The residual is measured in the norm induced by the inverse of the
/// preconditioner; iteration stops once it drops below `tol` times its
/// initial value.
pub fn minres(
    op: &impl LinearOperator,
    b: &[f64],
    precond: &impl Preconditioner,
    tol: f64,
    maxit: usize,
) -> Result<MinresResult> {
    let n = op.dim();
    if b.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: b.len() });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let mut x = vec![0.0; n];
    let mut v_old = vec![0.0; n];
    let mut v = b.to_vec();
    let mut z = vec![0.0; n];
    precond.apply_inverse(&v, &mut z);
    let gamma2 = dot(&z, &v);
    if gamma2 < 0.0 {
        return Err(Error::Breakdown(0));
    }
    let mut gamma = gamma2.sqrt();
    let gamma_first = gamma;
    let mut history = vec![gamma];
    if gamma == 0.0 {
        return Ok(MinresResult {
            x,
            iterations: 0,
            residual_history: history,
            converged: true,
        });
    }
    let mut gamma_old = 1.0;
    let mut eta = gamma;
    let (mut s_old, mut s, mut c_old, mut c) = (0.0, 0.0, 1.0, 1.0);
    let mut w_old = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut az = vec![0.0; n];
    let mut z_new = vec![0.0; n];

    for j in 1..=maxit {
        z.iter_mut().for_each(|e| *e /= gamma);
        op.apply(&z, &mut az);
        let delta = dot(&az, &z);
        // v_old becomes v_{j+1}
        for i in 0..n {
            v_old[i] = az[i] - (delta / gamma) * v[i] - (gamma / gamma_old) * v_old[i];
        }
        std::mem::swap(&mut v_old, &mut v);
        precond.apply_inverse(&v, &mut z_new);
        let g2 = dot(&z_new, &v);
        if g2 < -BREAKDOWN_TOL * gamma_first * gamma_first {
            return Err(Error::Breakdown(j));
        }
        let gamma_new = g2.max(0.0).sqrt();
        let alpha0 = c * delta - c_old * s * gamma;
        let alpha1 = (alpha0 * alpha0 + gamma_new * gamma_new).sqrt();
        if alpha1 <= BREAKDOWN_TOL * gamma_first {
            return Err(Error::Breakdown(j));
        }
        let alpha2 = s * delta + c_old * c * gamma;
        let alpha3 = s_old * gamma;
        let c_new = alpha0 / alpha1;
        let s_new = gamma_new / alpha1;
        // w_old becomes w_{j+1}
        for i in 0..n {
            w_old[i] = (z[i] - alpha3 * w_old[i] - alpha2 * w[i]) / alpha1;
        }
        std::mem::swap(&mut w_old, &mut w);
        for i in 0..n {
            x[i] += c_new * eta * w[i];
        }
        eta *= -s_new;
        history.push(eta.abs());

        gamma_old = gamma;
        gamma = gamma_new;
        c_old = c;
        c = c_new;
        s_old = s;
        s = s_new;
        std::mem::swap(&mut z, &mut z_new);

        if eta.abs() <= tol * gamma_first || gamma_new <= BREAKDOWN_TOL * gamma_first {
            return Ok(MinresResult {
                x,
                iterations: j,
                residual_history: history,
                converged: true,
            });
        }
    }
    Ok(MinresResult {
        x,
        iterations: maxit,
        residual_history: history,
        converged: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::{IdentityPreconditioner, KroneckerSumOperator, MeanPreconditioner, SparseMatrix};

    /// Dense Gaussian elimination with partial pivoting.
    fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
        let n = b.len();
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
            a.swap(k, p);
            b.swap(k, p);
            for i in k + 1..n {
                let f = a[i][k] / a[k][k];
                for j in k..n {
                    a[i][j] -= f * a[k][j];
                }
                b[i] -= f * b[k];
            }
        }
        let mut x = vec![0.0; n];
        for i in (0..n).rev() {
            let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
            x[i] = (b[i] - s) / a[i][i];
        }
        x
    }

    #[test]
    fn identity_converges_in_one_step() {
        let op = SparseMatrix::identity(4);
        let b = [1.0, -2.0, 0.5, 3.0];
        let r = minres(&op, &b, &IdentityPreconditioner, 1e-12, 10).unwrap();
        assert_eq!(r.iterations, 1);
        assert!(r.converged);
        for (x, b) in r.x.iter().zip(b) {
            assert!((x - b).abs() < 1e-15);
        }
    }

    #[test]
    fn kronecker_system_matches_dense_solve() {
        let k0 = SparseMatrix::from_dense(&[vec![2.0, -1.0, 0.0], vec![-1.0, 2.0, -1.0], vec![0.0, -1.0, 2.0]]);
        let k1 = SparseMatrix::from_dense(&[vec![0.3, 0.1, 0.0], vec![0.1, -0.2, 0.0], vec![0.0, 0.0, 0.4]]);
        let g1 = SparseMatrix::from_dense(&[vec![0.0, 0.577], vec![0.577, 0.0]]);
        let op = KroneckerSumOperator::new(vec![(SparseMatrix::identity(2), k0.clone()), (g1, k1)]).unwrap();
        let b = [1.0, 0.0, -1.0, 0.5, 2.0, 0.0];
        let pc = MeanPreconditioner::new(&k0, 2).unwrap();
        let r = minres(&op, &b, &pc, 1e-12, 50).unwrap();
        let exact = dense_solve(op.to_dense(), b.to_vec());
        for (x, e) in r.x.iter().zip(&exact) {
            assert!((x - e).abs() < 1e-10);
        }
        assert!(r.residual_history.windows(2).all(|h| h[1] <= h[0] * (1.0 + 1e-12)));
    }

    #[test]
    fn maxit_is_flagged_not_fatal() {
        let a = SparseMatrix::from_dense(&[
            vec![4.0, 1.0, 0.0, 0.0],
            vec![1.0, 3.0, 1.0, 0.0],
            vec![0.0, 1.0, -2.0, 1.0],
            vec![0.0, 0.0, 1.0, 1.0],
        ]);
        let r = minres(&a, &[1.0, 1.0, 1.0, 1.0], &IdentityPreconditioner, 1e-14, 2).unwrap();
        assert!(!r.converged);
        assert_eq!(r.iterations, 2);
    }
}
