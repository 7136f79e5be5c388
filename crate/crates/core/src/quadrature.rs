//! Quadrature on intervals and triangles.

use std::sync::OnceLock;

use crate::mesh::Point;

/// Returns `(P_n(z), P_n'(z))`.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    for k in 2..=n {
        let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
        p0 = p1;
        p1 = p2;
    }
    if n == 1 {
        return (z, 1.0);
    }
    (p1, n as f64 * (z * p1 - p0) / (z * z - 1.0))
}

/// Gauss–Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (p, dp) = legendre(n, z);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        let dp = legendre(n, z).1;
        x[i] = -z;
        x[n - 1 - i] = z;
        w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Quadrature rule on a triangle in barycentric coordinates. Weights sum to 1
/// and are multiplied by the element area when integrating.
#[derive(Debug, Clone)]
pub struct TriangleRule {
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl TriangleRule {
    /// The 7-point rule exact for polynomials of degree 5.
    pub fn degree5() -> &'static TriangleRule {
        static RULE: OnceLock<TriangleRule> = OnceLock::new();
        RULE.get_or_init(|| {
            let s = 15f64.sqrt();
            let a1 = (6.0 - s) / 21.0;
            let a2 = (6.0 + s) / 21.0;
            let w1 = (155.0 - s) / 1200.0;
            let w2 = (155.0 + s) / 1200.0;
            let b1 = 1.0 - 2.0 * a1;
            let b2 = 1.0 - 2.0 * a2;
            let third = 1.0 / 3.0;
            TriangleRule {
                points: vec![
                    [third, third, third],
                    [b1, a1, a1],
                    [a1, b1, a1],
                    [a1, a1, b1],
                    [b2, a2, a2],
                    [a2, b2, a2],
                    [a2, a2, b2],
                ],
                weights: vec![0.225, w1, w1, w1, w2, w2, w2],
            }
        })
    }

    /// Collapsed tensor-product Gauss rule with `n * n` points, exact for
    /// polynomials of degree `2n - 2`.
    pub fn conical(n: usize) -> TriangleRule {
        let (x, w) = gauss_legendre(n);
        let mut points = Vec::with_capacity(n * n);
        let mut weights = Vec::with_capacity(n * n);
        for i in 0..n {
            let s = 0.5 * (x[i] + 1.0);
            for j in 0..n {
                let t = 0.5 * (x[j] + 1.0);
                let xi = s;
                let eta = t * (1.0 - s);
                points.push([1.0 - xi - eta, xi, eta]);
                // 0.25 from the interval maps, 2 to normalise by the reference area
                weights.push(0.5 * w[i] * w[j] * (1.0 - s));
            }
        }
        TriangleRule { points, weights }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }
}

#[inline]
pub fn map_point(p: &[Point; 3], l: &[f64; 3]) -> Point {
    [
        l[0] * p[0][0] + l[1] * p[1][0] + l[2] * p[2][0],
        l[0] * p[0][1] + l[1] * p[1][1] + l[2] * p[2][1],
    ]
}
