use super::index::{MultiIndex, MultiIndexSet};
use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::sparse::{SparseMatrix, TripletBuilder};

/// Nodes of the discretized Stieltjes procedure.
const STIELTJES_POINTS: usize = 512;

/// Probability measure of each parameter on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureFamily {
    /// `dπ = dy / 2`; scaled Legendre polynomials.
    Uniform,
    /// Gaussian with standard deviation `sigma0` truncated to `[-1, 1]`;
    /// Rys polynomials.
    TruncatedGaussian { sigma0: f64 },
}

/// Standard normal CDF.
fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

impl MeasureFamily {
    pub fn density(&self, y: f64) -> f64 {
        if !(-1.0..=1.0).contains(&y) {
            return 0.0;
        }
        match *self {
            MeasureFamily::Uniform => 0.5,
            MeasureFamily::TruncatedGaussian { sigma0 } => {
                let z = sigma0 * (2.0 * std::f64::consts::PI).sqrt() * (2.0 * normal_cdf(1.0 / sigma0) - 1.0);
                (-y * y / (2.0 * sigma0 * sigma0)).exp() / z
            }
        }
    }

    /// Recurrence coefficients `β_1..β_n` of the orthonormal family with
    /// `y p_k = β_{k+1} p_{k+1} + β_k p_{k-1}`.
    pub fn recurrence(&self, n_max: usize) -> Result<Recurrence> {
        if n_max == 0 {
            return Err(Error::InvalidArgument("recurrence needs at least one coefficient".into()));
        }
        let beta = match *self {
            MeasureFamily::Uniform => (1..=n_max).map(|n| n as f64 / ((4 * n * n - 1) as f64).sqrt()).collect(),
            MeasureFamily::TruncatedGaussian { sigma0 } => {
                if !(sigma0 > 0.0) {
                    return Err(Error::InvalidArgument(format!("sigma0 must be positive, got {sigma0}")));
                }
                stieltjes(self, n_max)?
            }
        };
        Ok(Recurrence { beta })
    }
}

/// Discretized Stieltjes procedure on a Gauss-Legendre grid.
fn stieltjes(measure: &MeasureFamily, n_max: usize) -> Result<Vec<f64>> {
    let (y, w) = gauss_legendre(STIELTJES_POINTS);
    let mut w: Vec<f64> = y.iter().zip(&w).map(|(y, w)| w * measure.density(*y)).collect();
    let mass: f64 = w.iter().sum();
    w.iter_mut().for_each(|v| *v /= mass);
    let mut p_old = vec![0.0; y.len()];
    let mut p = vec![1.0; y.len()];
    let mut beta = Vec::with_capacity(n_max);
    let mut b_prev = 0.0;
    for n in 1..=n_max {
        let mut next: Vec<f64> = (0..y.len()).map(|i| y[i] * p[i] - b_prev * p_old[i]).collect();
        // remove the diagonal coefficient, which vanishes for symmetric measures up to rounding
        let a: f64 = (0..y.len()).map(|i| w[i] * next[i] * p[i]).sum();
        next.iter_mut().zip(&p).for_each(|(q, pi)| *q -= a * pi);
        let b2: f64 = (0..y.len()).map(|i| w[i] * next[i] * next[i]).sum();
        if !(b2 > 0.0) || !b2.is_finite() {
            return Err(Error::RecurrenceBreakdown(n));
        }
        let b = b2.sqrt();
        next.iter_mut().for_each(|q| *q /= b);
        beta.push(b);
        b_prev = b;
        p_old = std::mem::replace(&mut p, next);
    }
    Ok(beta)
}

/// Three-term recurrence coefficients of an orthonormal polynomial family.
#[derive(Debug, Clone, PartialEq)]
pub struct Recurrence {
    beta: Vec<f64>,
}

impl Recurrence {
    pub fn max_degree(&self) -> usize {
        self.beta.len()
    }

    /// `β_n` for `n ≥ 1`.
    pub fn beta(&self, n: usize) -> f64 {
        assert!(n >= 1 && n <= self.beta.len(), "recurrence coefficient {n} not available");
        self.beta[n - 1]
    }

    /// `p_0(y)..p_n(y)`.
    pub fn eval(&self, n: usize, y: f64) -> Vec<f64> {
        let mut p = vec![1.0; n + 1];
        if n >= 1 {
            p[1] = y / self.beta(1);
        }
        for k in 1..n {
            p[k + 1] = (y * p[k] - self.beta(k) * p[k - 1]) / self.beta(k + 1);
        }
        p
    }

    /// `⟨y_m P_ν, P_μ⟩`: `β_{max(ν_m, μ_m)}` when the indices differ by one
    /// in coordinate `m` only, otherwise 0.
    pub fn coupling(&self, nu: &MultiIndex, mu: &MultiIndex, m: usize) -> f64 {
        match nu.unit_difference(mu) {
            Some(k) if k == m => self.beta(nu.get(m).max(mu.get(m)) as usize),
            _ => 0.0,
        }
    }

    /// `[G_m]_{tj} = ⟨y_m P_κ(j), P_κ(t)⟩` over `set`; `G_0` is the identity.
    pub fn build_g(&self, set: &MultiIndexSet, m: usize) -> SparseMatrix {
        let n = set.len();
        if m == 0 {
            return SparseMatrix::identity(n);
        }
        let mut tb = TripletBuilder::with_capacity(2 * n);
        for (t, nu) in set.indices().iter().enumerate() {
            for up in [true, false] {
                if let Some(mu) = nu.shifted(m, up) {
                    if let Some(j) = set.position(&mu) {
                        tb.push(t, j, self.beta(nu.get(m).max(mu.get(m)) as usize));
                    }
                }
            }
        }
        tb.build(n, n)
    }
}
