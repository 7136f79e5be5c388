//! Reference-element shape functions and element integrals.

use super::{Coefficient, Order};
use crate::mesh::Point;
use crate::quadrature::{map_point, TriangleRule};

/// Affine element data: area and gradients of the barycentric coordinates.
#[derive(Debug, Clone, Copy)]
pub struct Geometry {
    pub p: [Point; 3],
    pub area: f64,
    pub grad: [[f64; 2]; 3],
}

impl Geometry {
    pub fn new(p: [Point; 3]) -> Geometry {
        let d = (p[1][0] - p[0][0]) * (p[2][1] - p[0][1]) - (p[1][1] - p[0][1]) * (p[2][0] - p[0][0]);
        let mut grad = [[0.0; 2]; 3];
        for i in 0..3 {
            let a = p[(i + 1) % 3];
            let b = p[(i + 2) % 3];
            grad[i] = [(a[1] - b[1]) / d, (b[0] - a[0]) / d];
        }
        Geometry { p, area: 0.5 * d, grad }
    }

    #[inline]
    pub fn point(&self, l: &[f64; 3]) -> Point {
        map_point(&self.p, l)
    }

    /// Barycentric coordinates of `x`.
    pub fn barycentric(&self, x: Point) -> [f64; 3] {
        let mut l = [0.0; 3];
        for i in 0..3 {
            let a = self.p[(i + 1) % 3];
            l[i] = self.grad[i][0] * (x[0] - a[0]) + self.grad[i][1] * (x[1] - a[1]);
        }
        l
    }

    /// Length of local edge `i` (opposite vertex `i`).
    pub fn edge_length(&self, i: usize) -> f64 {
        let a = self.p[(i + 1) % 3];
        let b = self.p[(i + 2) % 3];
        ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
    }

    /// Outward unit normal of local edge `i`.
    pub fn normal(&self, i: usize) -> [f64; 2] {
        let g = self.grad[i];
        let n = (g[0] * g[0] + g[1] * g[1]).sqrt();
        [-g[0] / n, -g[1] / n]
    }
}

/// Shape function values at barycentric point `l`.
#[inline]
pub fn shape(order: Order, l: &[f64; 3], out: &mut [f64; 6]) {
    match order {
        Order::P1 => {
            out[..3].copy_from_slice(l);
        }
        Order::P2 => {
            for i in 0..3 {
                out[i] = l[i] * (2.0 * l[i] - 1.0);
                out[3 + i] = 4.0 * l[(i + 1) % 3] * l[(i + 2) % 3];
            }
        }
    }
}

/// Shape function gradients at barycentric point `l`.
#[inline]
pub fn shape_grad(order: Order, l: &[f64; 3], g: &Geometry, out: &mut [[f64; 2]; 6]) {
    match order {
        Order::P1 => {
            out[..3].copy_from_slice(&g.grad);
        }
        Order::P2 => {
            for i in 0..3 {
                let s = 4.0 * l[i] - 1.0;
                out[i] = [s * g.grad[i][0], s * g.grad[i][1]];
                let (j, k) = ((i + 1) % 3, (i + 2) % 3);
                out[3 + i] = [
                    4.0 * (l[j] * g.grad[k][0] + l[k] * g.grad[j][0]),
                    4.0 * (l[j] * g.grad[k][1] + l[k] * g.grad[j][1]),
                ];
            }
        }
    }
}

/// Constant Hessians of the P2 shape functions.
pub fn p2_hessians(g: &Geometry) -> [[[f64; 2]; 2]; 6] {
    let mut h = [[[0.0; 2]; 2]; 6];
    let outer = |a: [f64; 2], b: [f64; 2]| [[a[0] * b[0], a[0] * b[1]], [a[1] * b[0], a[1] * b[1]]];
    for i in 0..3 {
        let o = outer(g.grad[i], g.grad[i]);
        let (j, k) = ((i + 1) % 3, (i + 2) % 3);
        let a = outer(g.grad[j], g.grad[k]);
        for r in 0..2 {
            for c in 0..2 {
                h[i][r][c] = 4.0 * o[r][c];
                h[3 + i][r][c] = 4.0 * (a[r][c] + a[c][r]);
            }
        }
    }
    h
}

#[inline]
fn a_dot(m: &[[f64; 2]; 2], u: [f64; 2], v: [f64; 2]) -> f64 {
    u[0] * (m[0][0] * v[0] + m[0][1] * v[1]) + u[1] * (m[1][0] * v[0] + m[1][1] * v[1])
}

/// Element stiffness matrix; only the leading `order.local_dofs()` block is used.
pub fn element_stiffness(order: Order, g: &Geometry, coeff: &Coefficient) -> [[f64; 6]; 6] {
    let n = order.local_dofs();
    let mut k = [[0.0; 6]; 6];
    if let (Order::P1, Some(m)) = (order, coeff.constant_tensor()) {
        for i in 0..3 {
            for j in 0..3 {
                k[i][j] = g.area * a_dot(&m, g.grad[i], g.grad[j]);
            }
        }
        return k;
    }
    let rule = TriangleRule::degree5();
    let mut dphi = [[0.0; 2]; 6];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let m = coeff.tensor_at(g.point(l));
        shape_grad(order, l, g, &mut dphi);
        let wa = w * g.area;
        for i in 0..n {
            for j in i..n {
                k[i][j] += wa * a_dot(&m, dphi[i], dphi[j]);
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            k[i][j] = k[j][i];
        }
    }
    k
}

/// Element load vector `∫ f φ_i` by the degree-5 rule. Returns the offending
/// point when `f` is not finite there.
pub fn element_load(order: Order, g: &Geometry, f: &dyn Fn(Point) -> f64) -> Result<[f64; 6], (f64, Point)> {
    let n = order.local_dofs();
    let rule = TriangleRule::degree5();
    let mut b = [0.0; 6];
    let mut phi = [0.0; 6];
    for (l, w) in rule.points.iter().zip(&rule.weights) {
        let x = g.point(l);
        let fx = f(x);
        if !fx.is_finite() {
            return Err((fx, x));
        }
        shape(order, l, &mut phi);
        for i in 0..n {
            b[i] += w * g.area * fx * phi[i];
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_triangle_p1_stiffness() {
        let g = Geometry::new([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]]);
        let k = element_stiffness(Order::P1, &g, &Coefficient::Constant(1.0));
        let want = [[1.0, -0.5, -0.5], [-0.5, 0.5, 0.0], [-0.5, 0.0, 0.5]];
        for i in 0..3 {
            for j in 0..3 {
                assert!((k[i][j] - want[i][j]).abs() < 1e-15);
            }
        }
        // the quadrature path agrees with the closed form
        let kq = element_stiffness(Order::P1, &g, &Coefficient::field(|_| 1.0));
        for i in 0..3 {
            for j in 0..3 {
                assert!((kq[i][j] - want[i][j]).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn p2_shape_functions_are_nodal() {
        let nodes = [
            [1.0, 0.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [0.0, 0.5, 0.5],
            [0.5, 0.0, 0.5],
            [0.5, 0.5, 0.0],
        ];
        let mut phi = [0.0; 6];
        for (a, l) in nodes.iter().enumerate() {
            shape(Order::P2, l, &mut phi);
            for (b, v) in phi.iter().enumerate() {
                assert!((v - if a == b { 1.0 } else { 0.0 }).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn p2_gradients_match_finite_differences() {
        let g = Geometry::new([[0.1, 0.2], [1.3, -0.1], [0.4, 0.9]]);
        let x = g.point(&[0.2, 0.5, 0.3]);
        let mut dphi = [[0.0; 2]; 6];
        shape_grad(Order::P2, &g.barycentric(x), &g, &mut dphi);
        let h = 1e-6;
        for d in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[d] += h;
            xm[d] -= h;
            let (mut fp, mut fm) = ([0.0; 6], [0.0; 6]);
            shape(Order::P2, &g.barycentric(xp), &mut fp);
            shape(Order::P2, &g.barycentric(xm), &mut fm);
            for i in 0..6 {
                assert!(((fp[i] - fm[i]) / (2.0 * h) - dphi[i][d]).abs() < 1e-8);
            }
        }
    }
}
