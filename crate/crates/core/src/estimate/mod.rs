//! A posteriori energy error estimation for P1 and P2 approximations.

mod ees1;
pub(crate) mod hierarchical;
pub(crate) mod local;

pub use ees1::{estimate_ees1, Bubble};
pub use hierarchical::{estimate_ees2, estimate_ees3};
pub use local::Subdivision;

use crate::error::{Error, Result};
use crate::fem::element::{p2_hessians, shape_grad, Geometry};
use crate::fem::{DeterministicProblem, FieldSolution, Order};
use crate::mesh::{BoundaryMarker, Mesh};

/// Mesh entities that carry local indicators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Carrier {
    Elements,
    Edges,
}

/// Local error indicators and the total estimate.
///
/// Edge indicators are indexed by edge-table id; Dirichlet edges carry zero.
#[derive(Debug, Clone)]
pub struct ErrorIndicators {
    pub carrier: Carrier,
    pub values: Vec<f64>,
    pub total: f64,
}

impl ErrorIndicators {
    /// Indicators with total equal to their ℓ₂ norm.
    pub fn from_values(carrier: Carrier, values: Vec<f64>) -> Self {
        let total = values.iter().map(|v| v * v).sum::<f64>().sqrt();
        ErrorIndicators { carrier, values, total }
    }

    pub fn sum_of_squares(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum()
    }
}

/// Error estimation strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Local element residual problems.
    Ees1(Bubble),
    /// Global hierarchical estimator.
    Ees2,
    /// Two-level estimator.
    Ees3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EstimatorConfig {
    pub strategy: Strategy,
    pub carrier: Carrier,
    pub subdivision: Subdivision,
}

impl EstimatorConfig {
    pub fn new(strategy: Strategy, carrier: Carrier) -> Self {
        EstimatorConfig {
            strategy,
            carrier,
            subdivision: Subdivision::Bisec3,
        }
    }
}

/// Runs the configured estimator on `solution`.
pub fn estimate(problem: &DeterministicProblem, solution: &FieldSolution, cfg: &EstimatorConfig) -> Result<ErrorIndicators> {
    match cfg.strategy {
        Strategy::Ees1(bubble) => {
            if cfg.carrier != Carrier::Elements {
                return Err(Error::InvalidArgument("EES1 produces element indicators only".into()));
            }
            estimate_ees1(problem, solution, bubble, cfg.subdivision)
        }
        Strategy::Ees2 => estimate_ees2(problem, solution, cfg.carrier, cfg.subdivision),
        Strategy::Ees3 => estimate_ees3(problem, solution, cfg.carrier, cfg.subdivision),
    }
}

pub(crate) fn is_dirichlet(mesh: &Mesh, a: usize, b: usize) -> bool {
    mesh.boundary_marker(a, b) == Some(BoundaryMarker::Dirichlet)
}

/// Local dof values of `sol` on triangle `t`.
pub(crate) fn local_values(sol: &FieldSolution, t: usize) -> [f64; 6] {
    let d = sol.space.dofs(t);
    let n = sol.space.order().local_dofs();
    let mut u = [0.0; 6];
    for i in 0..n {
        u[i] = sol.values[d[i]];
    }
    u
}

/// Gradient of the local polynomial with dof values `u` at barycentric `l`.
pub(crate) fn grad_at(order: Order, g: &Geometry, l: &[f64; 3], u: &[f64; 6]) -> [f64; 2] {
    let mut dphi = [[0.0; 2]; 6];
    shape_grad(order, l, g, &mut dphi);
    let mut r = [0.0; 2];
    for i in 0..order.local_dofs() {
        r[0] += u[i] * dphi[i][0];
        r[1] += u[i] * dphi[i][1];
    }
    r
}

/// Constant Hessian of the local polynomial (zero for P1).
pub(crate) fn hessian(order: Order, g: &Geometry, u: &[f64; 6]) -> [[f64; 2]; 2] {
    let mut h = [[0.0; 2]; 2];
    if order == Order::P2 {
        let hs = p2_hessians(g);
        for i in 0..6 {
            for r in 0..2 {
                for c in 0..2 {
                    h[r][c] += u[i] * hs[i][r][c];
                }
            }
        }
    }
    h
}

#[inline]
pub(crate) fn mat_vec(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
    [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
}
