use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::fem::Coefficient;
use crate::mesh::Point;

/// Parametric coefficient families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpansionKind {
    /// Separable exponential covariance on `(-1, 1)²` with standard
    /// deviation `sigma`, correlation lengths `l1`, `l2` and constant mean.
    Ce1 { sigma: f64, l1: f64, l2: f64, mean: f64 },
    /// Planar Fourier modes with amplitudes `A m^{-decay}`, `A ζ(decay) = 0.9`.
    Ce2 { decay: f64 },
    /// Products of cosines with eigenvalues `½ exp(-π k² ℓ²)`.
    Ce3 { ell: f64 },
}

/// One eigenpair of the 1D kernel `exp(-|s - t| / l)` on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KlMode1d {
    pub lambda: f64,
    pub omega: f64,
    pub even: bool,
    norm: f64,
}

impl KlMode1d {
    pub fn eval(&self, t: f64) -> f64 {
        if self.even {
            (self.omega * t).cos() / self.norm
        } else {
            (self.omega * t).sin() / self.norm
        }
    }

    pub fn deriv(&self, t: f64) -> f64 {
        if self.even {
            -self.omega * (self.omega * t).sin() / self.norm
        } else {
            self.omega * (self.omega * t).cos() / self.norm
        }
    }

    /// `max_{|t| ≤ 1} |φ(t)|`.
    pub fn sup(&self) -> f64 {
        let peak = if self.even || self.omega >= PI / 2.0 { 1.0 } else { self.omega.sin() };
        peak / self.norm
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, k: usize) -> Result<f64> {
    let (mut fa, fb) = (f(a), f(b));
    if fa * fb > 0.0 {
        return Err(Error::BracketFailure(k));
    }
    for _ in 0..200 {
        let c = 0.5 * (a + b);
        let fc = f(c);
        if fc == 0.0 || b - a < 1e-15 * c.abs().max(1.0) {
            return Ok(c);
        }
        if fa * fc < 0.0 {
            b = c;
        } else {
            a = c;
            fa = fc;
        }
    }
    Ok(0.5 * (a + b))
}

/// The `count` largest eigenpairs of `exp(-|s - t| / l)` on `[-1, 1]`, from
/// the even equation `c cos ω = ω sin ω` and the odd one
/// `ω cos ω + c sin ω = 0` with `c = 1 / l`; eigenvalue `2c / (ω² + c²)`.
pub fn exponential_kernel_modes(l: f64, count: usize) -> Result<Vec<KlMode1d>> {
    if !(l > 0.0) {
        return Err(Error::InvalidArgument(format!("correlation length must be positive, got {l}")));
    }
    let c = 1.0 / l;
    let mut out = Vec::with_capacity(count);
    let mut k = 0;
    while out.len() < count {
        let kp = k as f64 * PI;
        // ω cannot be 0 on the even branch for c > 0, so the bracket is open at kπ
        let w = bisect(|w| c * w.cos() - w * w.sin(), kp, kp + 0.5 * PI, 2 * k)?;
        out.push(KlMode1d {
            lambda: 2.0 * c / (w * w + c * c),
            omega: w,
            even: true,
            norm: (1.0 + (2.0 * w).sin() / (2.0 * w)).sqrt(),
        });
        if out.len() < count {
            let k1 = (k + 1) as f64 * PI;
            let w = bisect(|w| w * w.cos() + c * w.sin(), k1 - 0.5 * PI, k1, 2 * k + 1)?;
            out.push(KlMode1d {
                lambda: 2.0 * c / (w * w + c * c),
                omega: w,
                even: false,
                norm: (1.0 - (2.0 * w).sin() / (2.0 * w)).sqrt(),
            });
        }
        k += 1;
    }
    out.sort_by(|a, b| b.lambda.total_cmp(&a.lambda));
    Ok(out)
}

/// `ζ(s)` by direct summation with an Euler-Maclaurin tail.
pub fn riemann_zeta(s: f64) -> f64 {
    assert!(s > 1.0);
    let n = 1000usize;
    let head: f64 = (1..n).map(|k| (k as f64).powf(-s)).sum();
    let nf = n as f64;
    let tail = nf.powf(1.0 - s) / (s - 1.0) + 0.5 * nf.powf(-s) + s * nf.powf(-s - 1.0) / 12.0
        - s * (s + 1.0) * (s + 2.0) * nf.powf(-s - 3.0) / 720.0;
    head + tail
}

/// `k(m)`, `β_1(m)`, `β_2(m)` of the planar Fourier enumeration.
pub fn fourier_indices(m: usize) -> Result<(usize, usize, usize)> {
    if m == 0 {
        return Err(Error::InvalidArgument("Fourier modes are numbered from 1".into()));
    }
    let k = (-0.5 + (0.25 + 2.0 * m as f64).sqrt()).floor() as usize;
    let b1 = m - k * (k + 1) / 2;
    Ok((k, b1, k - b1))
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    /// `α cos(2π b1 x₁) cos(2π b2 x₂)`.
    Fourier { alpha: f64, b1: f64, b2: f64 },
    /// `amp φ̄_i(x₁) φ̄_j(x₂)` with `φ̄_0 = 1`, `φ̄_k = √2 cos(πk t)`.
    Cosine { amp: f64, i: usize, j: usize },
    /// `amp φ_1(x₁) φ_2(x₂)`.
    Kl { amp: f64, f1: KlMode1d, f2: KlMode1d },
}

fn cosine(k: usize, t: f64) -> (f64, f64) {
    if k == 0 {
        (1.0, 0.0)
    } else {
        let w = PI * k as f64;
        (2f64.sqrt() * (w * t).cos(), -2f64.sqrt() * w * (w * t).sin())
    }
}

impl Mode {
    fn eval(&self, x: Point) -> (f64, [f64; 2]) {
        match *self {
            Mode::Fourier { alpha, b1, b2 } => {
                let (w1, w2) = (2.0 * PI * b1, 2.0 * PI * b2);
                let (c1, c2) = ((w1 * x[0]).cos(), (w2 * x[1]).cos());
                (alpha * c1 * c2, [-alpha * w1 * (w1 * x[0]).sin() * c2, -alpha * w2 * c1 * (w2 * x[1]).sin()])
            }
            Mode::Cosine { amp, i, j } => {
                let (p, dp) = cosine(i, x[0]);
                let (q, dq) = cosine(j, x[1]);
                (amp * p * q, [amp * dp * q, amp * p * dq])
            }
            Mode::Kl { amp, f1, f2 } => {
                let (p, q) = (f1.eval(x[0]), f2.eval(x[1]));
                (amp * p * q, [amp * f1.deriv(x[0]) * q, amp * p * f2.deriv(x[1])])
            }
        }
    }

    fn sup(&self) -> f64 {
        match *self {
            Mode::Fourier { alpha, .. } => alpha.abs(),
            Mode::Cosine { amp, i, j } => {
                let s = |k: usize| if k == 0 { 1.0 } else { 2f64.sqrt() };
                amp.abs() * s(i) * s(j)
            }
            Mode::Kl { amp, f1, f2 } => amp.abs() * f1.sup() * f2.sup(),
        }
    }
}

/// `a(x, y) = a₀(x) + Σ_m y_m a_m(x)` truncated after a fixed number of
/// terms. `scale` is the constant `c` with `Var(c y_m) = 1` (CE1, CE3).
#[derive(Debug, Clone, PartialEq)]
pub struct ParametricCoefficient {
    pub kind: ExpansionKind,
    pub mean: f64,
    pub scale: f64,
    modes: Vec<Mode>,
    /// Eigenvalues `λ_m` (CE1, CE3) or amplitudes `α_m` (CE2).
    pub weights: Vec<f64>,
}

impl ParametricCoefficient {
    /// The first `n_terms` terms. `param_std` is the standard deviation of
    /// each `y_m` under the chosen measure; it fixes `c = 1 / param_std`.
    pub fn new(kind: ExpansionKind, n_terms: usize, param_std: f64) -> Result<Self> {
        if !(param_std > 0.0) {
            return Err(Error::InvalidArgument("parameter standard deviation must be positive".into()));
        }
        let scale = 1.0 / param_std;
        let (mean, modes, weights) = match kind {
            ExpansionKind::Ce2 { decay } => {
                if !(decay > 1.0) {
                    return Err(Error::InvalidArgument(format!("decay exponent must exceed 1, got {decay}")));
                }
                let a = 0.9 / riemann_zeta(decay);
                let mut modes = Vec::with_capacity(n_terms);
                let mut w = Vec::with_capacity(n_terms);
                for m in 1..=n_terms {
                    let (_, b1, b2) = fourier_indices(m)?;
                    let alpha = a * (m as f64).powf(-decay);
                    modes.push(Mode::Fourier { alpha, b1: b1 as f64, b2: b2 as f64 });
                    w.push(alpha);
                }
                (1.0, modes, w)
            }
            ExpansionKind::Ce3 { ell } => {
                if !(ell > 0.0) {
                    return Err(Error::InvalidArgument(format!("correlation length must be positive, got {ell}")));
                }
                let lam = |k: usize| if k == 0 { 0.5 } else { 0.5 * (-PI * (k * k) as f64 * ell * ell).exp() };
                let side = n_terms.max(1);
                let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
                for i in 0..side {
                    for j in 0..side - i {
                        pairs.push((i, j, lam(i) * lam(j)));
                    }
                }
                pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
                pairs.truncate(n_terms);
                let modes = pairs.iter().map(|&(i, j, l)| Mode::Cosine { amp: scale * l.sqrt(), i, j }).collect();
                (1.0, modes, pairs.iter().map(|p| p.2).collect())
            }
            ExpansionKind::Ce1 { sigma, l1, l2, mean } => {
                if !(sigma > 0.0) {
                    return Err(Error::InvalidArgument(format!("standard deviation must be positive, got {sigma}")));
                }
                let m1 = exponential_kernel_modes(l1, n_terms.max(1))?;
                let m2 = exponential_kernel_modes(l2, n_terms.max(1))?;
                let mut pairs: Vec<(usize, usize, f64)> = Vec::new();
                for (i, a) in m1.iter().enumerate() {
                    for (j, b) in m2.iter().enumerate().take(n_terms.max(1) - i) {
                        pairs.push((i, j, sigma * sigma * a.lambda * b.lambda));
                    }
                }
                pairs.sort_by(|a, b| b.2.total_cmp(&a.2).then((a.0, a.1).cmp(&(b.0, b.1))));
                pairs.truncate(n_terms);
                let modes = pairs
                    .iter()
                    .map(|&(i, j, l)| Mode::Kl {
                        amp: scale * l.sqrt(),
                        f1: m1[i],
                        f2: m2[j],
                    })
                    .collect();
                (mean, modes, pairs.iter().map(|p| p.2).collect())
            }
        };
        if !(mean > 0.0) {
            return Err(Error::NotCoercive(format!("mean coefficient {mean} is not positive")));
        }
        Ok(ParametricCoefficient { kind, mean, scale, modes, weights })
    }

    pub fn n_terms(&self) -> usize {
        self.modes.len()
    }

    /// `a_m(x)` and its gradient; `m = 0` is the mean.
    pub fn term(&self, m: usize, x: Point) -> (f64, [f64; 2]) {
        if m == 0 {
            (self.mean, [0.0, 0.0])
        } else {
            self.modes[m - 1].eval(x)
        }
    }

    pub fn sup_norm(&self, m: usize) -> f64 {
        if m == 0 {
            self.mean
        } else {
            self.modes[m - 1].sup()
        }
    }

    /// `τ = Σ_{m ≤ n} ‖a_m‖_∞ / a₀^min` over the first `n` terms.
    pub fn tau(&self, n: usize) -> f64 {
        (1..=n.min(self.n_terms())).map(|m| self.sup_norm(m)).sum::<f64>() / self.mean
    }

    /// Fails unless the first `n` terms exist and `τ < 1` over them.
    pub fn check(&self, n: usize) -> Result<()> {
        if n > self.n_terms() {
            return Err(Error::InvalidArgument(format!("coefficient has {} terms, {n} requested", self.n_terms())));
        }
        let tau = self.tau(n);
        if tau < 1.0 {
            Ok(())
        } else {
            Err(Error::NotCoercive(format!("tau = {tau:.4} over {n} terms")))
        }
    }

    /// `a_m` as a spatial coefficient.
    pub fn coefficient(&self, m: usize) -> Coefficient {
        if m == 0 {
            return Coefficient::Constant(self.mean);
        }
        let mode = self.modes[m - 1];
        Coefficient::field_with_grad(move |x| mode.eval(x).0, move |x| mode.eval(x).1)
    }

    /// `a(x, y)` for a parameter vector `y` (missing entries are 0).
    pub fn sample(&self, x: Point, y: &[f64]) -> f64 {
        self.mean + y.iter().take(self.n_terms()).enumerate().map(|(k, ym)| ym * self.modes[k].eval(x).0).sum::<f64>()
    }
}
