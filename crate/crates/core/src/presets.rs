//! The four test problems used by the command-line driver and the acceptance
//! suite, with their coarse meshes and default solver settings.

use std::sync::Arc;

use crate::adapt::{AdaptiveConfig, MarkingConfig};
use crate::error::Result;
use crate::estimate::{Bubble, Carrier, EstimatorConfig, Strategy};
use crate::fem::{Coefficient, DeterministicProblem, Order};
use crate::goal::{GoafemConfig, GoalFunctional};
use crate::mesh::{generate_structured, DomainKind, Mesh};
use crate::sgfem::{ExpansionKind, MeasureFamily, MultiIndexSet, ParametricCoefficient, SgfemConfig, SgfemProblem};

/// Point and value of the Example 2 target `u(0.01, 0.01)`.
pub const EXAMPLE2_POINT: [f64; 2] = [0.01, 0.01];
pub const EXAMPLE2_VALUE: f64 = 1.02679192610;

pub const SLIT_HALF_WIDTH: f64 = 0.005;

/// Coarse meshes: 128 triangles on the square, 96 on the L-shape.
pub fn coarse_mesh(domain: DomainKind) -> Result<Arc<Mesh>> {
    Ok(Arc::new(generate_structured(domain, 2)?))
}

/// Anisotropic diffusion `diag(1, 100)` with unit source on the square.
pub fn example1() -> DeterministicProblem {
    DeterministicProblem::new(DomainKind::Square, Coefficient::Tensor([[1.0, 0.0], [0.0, 100.0]]), Arc::new(|_| 1.0))
}

pub fn example1_config(strategy: Strategy, carrier: Carrier, theta: f64, tol: f64) -> AdaptiveConfig {
    AdaptiveConfig {
        order: Order::P1,
        estimator: EstimatorConfig::new(strategy, carrier),
        marking: MarkingConfig::doerfler(theta, carrier),
        tol,
        max_iter: 200,
    }
}

/// Laplace equation on the L-shape with `u = (1 - x₁)²` on the boundary.
pub fn example2() -> DeterministicProblem {
    DeterministicProblem::new(DomainKind::LShaped, Coefficient::Constant(1.0), Arc::new(|_| 0.0)).with_dirichlet(Arc::new(|x| (1.0 - x[0]).powi(2)))
}

pub fn example2_config(tol: f64) -> AdaptiveConfig {
    AdaptiveConfig {
        order: Order::P2,
        estimator: EstimatorConfig::new(Strategy::Ees1(Bubble::Quartic), Carrier::Elements),
        marking: MarkingConfig::doerfler(0.5, Carrier::Elements),
        tol,
        max_iter: 200,
    }
}

/// Unit source on the slit domain, with the mollified point value at
/// `(0.4, -0.5)` as goal.
pub fn example3(r: f64) -> Result<(DeterministicProblem, GoalFunctional)> {
    let d = DomainKind::Slit(SLIT_HALF_WIDTH);
    let problem = DeterministicProblem::new(d, Coefficient::Constant(1.0), Arc::new(|_| 1.0));
    Ok((problem, GoalFunctional::new([0.4, -0.5], r, d)?))
}

pub fn example3_config(tol: f64) -> GoafemConfig {
    GoafemConfig {
        theta: 0.3,
        tol,
        ..GoafemConfig::default()
    }
}

/// Parametric diffusion on the L-shape: slowly decaying Fourier expansion
/// (decay 2), truncated Gaussian parameters with `σ₀ = 1` and the singular
/// source `(1 - x₁)^{-0.4}`.
pub fn example4() -> Result<SgfemProblem> {
    let measure = MeasureFamily::TruncatedGaussian { sigma0: 1.0 };
    let std = SgfemProblem::param_std(measure)?;
    let coeff = ParametricCoefficient::new(ExpansionKind::Ce2 { decay: 2.0 }, 200, std)?;
    // the source is integrable; quadrature never samples x₁ = 1
    SgfemProblem::new(DomainKind::LShaped, coeff, measure, Arc::new(|x| (1.0 - x[0]).powf(-0.4)))
}

pub fn example4_initial_set() -> MultiIndexSet {
    MultiIndexSet::first_order(1)
}

pub fn example4_config(tol: f64) -> SgfemConfig {
    SgfemConfig { tol, ..SgfemConfig::default() }
}
