//! Element-local function spaces used by the estimators: piecewise linear
//! hats on a uniform sub-triangulation, and Lagrange bases of degree 2 and 4.

use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::fem::element::Geometry;
use crate::fem::Coefficient;
use crate::mesh::Point;
use crate::quadrature::{gauss_legendre, TriangleRule};

pub(crate) const MAX_FNS: usize = 15;

/// Uniform sub-triangulation of an element through its edge midpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum Subdivision {
    /// Three bisections starting from the reference edge.
    #[default]
    Bisec3,
    /// Connect the edge midpoints.
    Red,
}

// Local nodes: vertices 0..3, then node 3 + i at the midpoint of the edge
// opposite vertex i. The reference edge is (0, 1), so its midpoint is node 5.
const BISEC3: [[usize; 3]; 4] = [[0, 5, 4], [4, 5, 2], [5, 1, 3], [5, 3, 2]];
const RED: [[usize; 3]; 4] = [[0, 5, 4], [5, 1, 3], [4, 3, 2], [3, 4, 5]];

impl Subdivision {
    fn cells(self) -> &'static [[usize; 3]; 4] {
        match self {
            Subdivision::Bisec3 => &BISEC3,
            Subdivision::Red => &RED,
        }
    }
}

fn node_bary(i: usize) -> [f64; 3] {
    let mut l = [0.0; 3];
    if i < 3 {
        l[i] = 1.0;
    } else {
        l[(i - 2) % 3] = 0.5;
        l[(i - 1) % 3] = 0.5;
    }
    l
}

/// Quadrature point carrying the basis values and their derivatives with
/// respect to the parent barycentric coordinates.
#[derive(Debug, Clone)]
pub(crate) struct QPoint {
    pub l: [f64; 3],
    /// Fraction of the element area (or edge length).
    pub w: f64,
    pub phi: [f64; MAX_FNS],
    pub dphi: [[f64; 3]; MAX_FNS],
}

impl QPoint {
    #[inline]
    pub fn grad(&self, i: usize, g: &Geometry) -> [f64; 2] {
        let d = &self.dphi[i];
        [
            d[0] * g.grad[0][0] + d[1] * g.grad[1][0] + d[2] * g.grad[2][0],
            d[0] * g.grad[0][1] + d[1] * g.grad[1][1] + d[2] * g.grad[2][1],
        ]
    }
}

/// A local space with precomputed element and edge quadrature.
#[derive(Debug)]
pub(crate) struct LocalSpace {
    pub n: usize,
    /// Edge on which each function's node lies, `None` for interior nodes
    /// and vertices.
    pub edge_of: Vec<Option<usize>>,
    pub bubbles: Vec<usize>,
    pub elem: Vec<QPoint>,
    pub edge: [Vec<QPoint>; 3],
}

fn edge_points(i: usize, eval: &dyn Fn(&[f64; 3]) -> QPoint) -> Vec<QPoint> {
    // two Gauss rules per edge so that functions which are linear on each
    // half-edge are integrated exactly
    let (x, w) = gauss_legendre(5);
    let (j, k) = ((i + 1) % 3, (i + 2) % 3);
    let mut out = Vec::with_capacity(10);
    for half in 0..2 {
        for (xq, wq) in x.iter().zip(&w) {
            let s = 0.5 * (half as f64 + 0.5 * (xq + 1.0));
            let mut l = [0.0; 3];
            l[j] = 1.0 - s;
            l[k] = s;
            let mut q = eval(&l);
            q.w = 0.25 * wq;
            out.push(q);
        }
    }
    out
}

fn invert3(m: [[f64; 3]; 3]) -> [[f64; 3]; 3] {
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let mut r = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            let (a, b) = ((j + 1) % 3, (j + 2) % 3);
            let (c, d) = ((i + 1) % 3, (i + 2) % 3);
            r[i][j] = (m[a][c] * m[b][d] - m[a][d] * m[b][c]) / det;
        }
    }
    r
}

impl LocalSpace {
    /// The six hats of a sub-triangulated element; bubbles are the midpoint hats.
    pub fn fine_p1(sub: Subdivision) -> &'static LocalSpace {
        static B: OnceLock<LocalSpace> = OnceLock::new();
        static R: OnceLock<LocalSpace> = OnceLock::new();
        let cell = match sub {
            Subdivision::Bisec3 => &B,
            Subdivision::Red => &R,
        };
        cell.get_or_init(|| Self::build_fine(sub))
    }

    fn build_fine(sub: Subdivision) -> LocalSpace {
        let cells = sub.cells();
        // for each cell, rows of M^{-1} map parent barycentrics to the cell's
        let maps: Vec<[[f64; 3]; 3]> = cells
            .iter()
            .map(|c| {
                let mut m = [[0.0; 3]; 3];
                for (q, &node) in c.iter().enumerate() {
                    let b = node_bary(node);
                    for r in 0..3 {
                        m[r][q] = b[r];
                    }
                }
                invert3(m)
            })
            .collect();
        let eval_in = |ci: usize, l: &[f64; 3]| {
            let mut q = QPoint {
                l: *l,
                w: 0.0,
                phi: [0.0; MAX_FNS],
                dphi: [[0.0; 3]; MAX_FNS],
            };
            for (a, &node) in cells[ci].iter().enumerate() {
                let row = maps[ci][a];
                q.phi[node] = row[0] * l[0] + row[1] * l[1] + row[2] * l[2];
                q.dphi[node] = row;
            }
            q
        };
        let locate = |l: &[f64; 3]| {
            (0..4)
                .max_by(|&a, &b| {
                    let m = |ci: usize| {
                        (0..3)
                            .map(|r| maps[ci][r][0] * l[0] + maps[ci][r][1] * l[1] + maps[ci][r][2] * l[2])
                            .fold(f64::INFINITY, f64::min)
                    };
                    m(a).total_cmp(&m(b)).then(b.cmp(&a))
                })
                .unwrap()
        };
        let rule = TriangleRule::degree5();
        let mut elem = Vec::new();
        for (ci, c) in cells.iter().enumerate() {
            let corners = c.map(node_bary);
            for (lq, wq) in rule.points.iter().zip(&rule.weights) {
                let mut l = [0.0; 3];
                for r in 0..3 {
                    l[r] = lq[0] * corners[0][r] + lq[1] * corners[1][r] + lq[2] * corners[2][r];
                }
                let mut q = eval_in(ci, &l);
                q.w = 0.25 * wq;
                elem.push(q);
            }
        }
        let edge = [0, 1, 2].map(|i| {
            edge_points(i, &|l| {
                // nudge inwards so the containing cell is unambiguous
                let c = [1.0 / 3.0; 3];
                let lin: [f64; 3] = std::array::from_fn(|r| l[r] + 1e-9 * (c[r] - l[r]));
                let mut q = eval_in(locate(&lin), l);
                q.l = *l;
                q
            })
        });
        LocalSpace {
            n: 6,
            edge_of: vec![None, None, None, Some(0), Some(1), Some(2)],
            bubbles: vec![3, 4, 5],
            elem,
            edge,
        }
    }

    /// Lagrange basis of degree `p` ∈ {2, 4}. For degree 2 the bubbles are the
    /// edge functions; for degree 4 they are the quarter-point edge functions
    /// and the three interior functions.
    pub fn lagrange(p: usize) -> &'static LocalSpace {
        static P2: OnceLock<LocalSpace> = OnceLock::new();
        static P4: OnceLock<LocalSpace> = OnceLock::new();
        match p {
            2 => P2.get_or_init(|| Self::build_lagrange(2)),
            4 => P4.get_or_init(|| Self::build_lagrange(4)),
            _ => panic!("unsupported Lagrange degree {p}"),
        }
    }

    fn build_lagrange(p: usize) -> LocalSpace {
        let basis = LagrangeBasis::new(p);
        let rule = if p == 2 {
            TriangleRule::degree5().clone()
        } else {
            TriangleRule::conical(7)
        };
        let eval = |l: &[f64; 3]| {
            let mut q = QPoint {
                l: *l,
                w: 0.0,
                phi: [0.0; MAX_FNS],
                dphi: [[0.0; 3]; MAX_FNS],
            };
            basis.eval(l, &mut q.phi, &mut q.dphi);
            q
        };
        let elem = rule
            .points
            .iter()
            .zip(&rule.weights)
            .map(|(l, &w)| {
                let mut q = eval(l);
                q.w = w;
                q
            })
            .collect();
        let edge = [0, 1, 2].map(|i| edge_points(i, &eval));
        let edge_of: Vec<Option<usize>> = basis.nodes.iter().map(|a| (0..3).find(|&i| a[i] == 0 && a.iter().filter(|&&v| v == 0).count() == 1)).collect();
        let bubbles = (0..basis.nodes.len())
            .filter(|&k| {
                let a = basis.nodes[k];
                let zeros = a.iter().filter(|&&v| v == 0).count();
                // exclude vertices and, for p = 4, the P2 midpoint nodes
                zeros < 2 && !(p == 4 && zeros == 1 && a.contains(&2))
            })
            .collect();
        LocalSpace {
            n: basis.nodes.len(),
            edge_of,
            bubbles,
            elem,
            edge,
        }
    }

    /// Dense `n × n` stiffness matrix `∫_K A∇φ_i·∇φ_j`.
    pub fn stiffness(&self, g: &Geometry, coeff: &Coefficient) -> Vec<f64> {
        let n = self.n;
        let mut k = vec![0.0; n * n];
        let constant = coeff.constant_tensor();
        let mut grads = [[0.0; 2]; MAX_FNS];
        for q in &self.elem {
            let m = constant.unwrap_or_else(|| coeff.tensor_at(g.point(&q.l)));
            for (i, gi) in grads.iter_mut().enumerate().take(n) {
                *gi = q.grad(i, g);
            }
            let wa = q.w * g.area;
            for i in 0..n {
                let ai = [m[0][0] * grads[i][0] + m[0][1] * grads[i][1], m[1][0] * grads[i][0] + m[1][1] * grads[i][1]];
                for j in i..n {
                    k[i * n + j] += wa * (ai[0] * grads[j][0] + ai[1] * grads[j][1]);
                }
            }
        }
        for i in 0..n {
            for j in 0..i {
                k[i * n + j] = k[j * n + i];
            }
        }
        k
    }

    /// `∫_K r φ_i` for every local function. Fails on non-finite values of `r`.
    pub fn load(&self, g: &Geometry, r: &dyn Fn(&QPoint, Point) -> f64) -> Result<Vec<f64>> {
        let mut b = vec![0.0; self.n];
        for q in &self.elem {
            let x = g.point(&q.l);
            let v = r(q, x);
            if !v.is_finite() {
                return Err(Error::NonFinite { value: v, x: x[0], y: x[1] });
            }
            let wa = q.w * g.area;
            for (i, bi) in b.iter_mut().enumerate() {
                *bi += wa * v * q.phi[i];
            }
        }
        Ok(b)
    }

    /// Adds `∫_E s φ_i` along local edge `i`.
    pub fn add_edge_load(&self, g: &Geometry, i: usize, s: &dyn Fn(&QPoint, Point) -> f64, b: &mut [f64]) {
        let len = g.edge_length(i);
        for q in &self.edge[i] {
            let x = g.point(&q.l);
            let v = q.w * len * s(q, x);
            for (k, bk) in b.iter_mut().enumerate() {
                *bk += v * q.phi[k];
            }
        }
    }
}

/// Nodal Lagrange basis of degree `p` in barycentric coordinates. Nodes are
/// the vertices, then the edge nodes of edge 0, 1, 2 (each from vertex
/// `i + 1` towards `i + 2`), then interior nodes.
#[derive(Debug, Clone)]
pub(crate) struct LagrangeBasis {
    p: usize,
    pub nodes: Vec<[usize; 3]>,
}

impl LagrangeBasis {
    pub fn new(p: usize) -> Self {
        let mut nodes = Vec::new();
        for i in 0..3 {
            let mut a = [0; 3];
            a[i] = p;
            nodes.push(a);
        }
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            for s in 1..p {
                let mut a = [0; 3];
                a[j] = p - s;
                a[k] = s;
                nodes.push(a);
            }
        }
        for a0 in 1..p {
            for a1 in 1..p {
                if a0 + a1 < p {
                    nodes.push([a0, a1, p - a0 - a1]);
                }
            }
        }
        LagrangeBasis { p, nodes }
    }

    /// Values and barycentric partial derivatives at `l`.
    pub fn eval(&self, l: &[f64; 3], phi: &mut [f64], dphi: &mut [[f64; 3]]) {
        let p = self.p as f64;
        for (k, a) in self.nodes.iter().enumerate() {
            // φ_a = Π_r Π_{s<a_r} (p λ_r - s) / (s + 1)
            let mut f = [1.0; 3];
            let mut df = [0.0; 3];
            for r in 0..3 {
                for s in 0..a[r] {
                    let c = 1.0 / (s as f64 + 1.0);
                    let t = (p * l[r] - s as f64) * c;
                    df[r] = df[r] * t + f[r] * p * c;
                    f[r] *= t;
                }
            }
            phi[k] = f[0] * f[1] * f[2];
            dphi[k] = [df[0] * f[1] * f[2], f[0] * df[1] * f[2], f[0] * f[1] * df[2]];
        }
    }
}

/// Solves the dense SPD system `a x = b` (row-major `n × n`) in place by
/// Cholesky. Returns `false` when a pivot is not positive.
pub(crate) fn dense_spd_solve(a: &mut [f64], b: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut d = a[j * n + j];
        for k in 0..j {
            d -= a[j * n + k] * a[j * n + k];
        }
        if !(d > 0.0) {
            return false;
        }
        let d = d.sqrt();
        a[j * n + j] = d;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / d;
        }
    }
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= a[i * n + k] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    for i in (0..n).rev() {
        let mut s = b[i];
        for k in i + 1..n {
            s -= a[k * n + i] * b[k];
        }
        b[i] = s / a[i * n + i];
    }
    true
}
