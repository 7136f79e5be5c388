use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{Mesh, Point};
use crate::quadrature::TriangleRule;

use super::element::Geometry;

/// A scalar function of position.
pub type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;
/// The gradient of a scalar function of position.
pub type GradField = Arc<dyn Fn(Point) -> [f64; 2] + Send + Sync>;

/// Diffusion coefficient.
#[derive(Clone)]
pub enum Coefficient {
    Constant(f64),
    /// Constant symmetric 2×2 tensor.
    Tensor([[f64; 2]; 2]),
    /// Scalar field with an optional analytic gradient.
    Field { value: Field, grad: Option<GradField> },
}

impl fmt::Debug for Coefficient {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coefficient::Constant(c) => write!(f, "Constant({c})"),
            Coefficient::Tensor(t) => write!(f, "Tensor({t:?})"),
            Coefficient::Field { grad, .. } => write!(f, "Field {{ analytic_grad: {} }}", grad.is_some()),
        }
    }
}

impl Coefficient {
    pub fn field(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        Coefficient::Field {
            value: Arc::new(f),
            grad: None,
        }
    }

    pub fn field_with_grad(
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(Point) -> [f64; 2] + Send + Sync + 'static,
    ) -> Self {
        Coefficient::Field {
            value: Arc::new(f),
            grad: Some(Arc::new(g)),
        }
    }

    pub fn constant_tensor(&self) -> Option<[[f64; 2]; 2]> {
        match *self {
            Coefficient::Constant(c) => Some([[c, 0.0], [0.0, c]]),
            Coefficient::Tensor(t) => Some(t),
            Coefficient::Field { .. } => None,
        }
    }

    #[inline]
    pub fn tensor_at(&self, x: Point) -> [[f64; 2]; 2] {
        match self {
            Coefficient::Constant(c) => [[*c, 0.0], [0.0, *c]],
            Coefficient::Tensor(t) => *t,
            Coefficient::Field { value, .. } => {
                let a = value(x);
                [[a, 0.0], [0.0, a]]
            }
        }
    }

    /// Scalar value; for a tensor this is the mean of the diagonal.
    pub fn scalar_at(&self, x: Point) -> f64 {
        let t = self.tensor_at(x);
        0.5 * (t[0][0] + t[1][1])
    }

    /// Divergence of the coefficient tensor's columns, i.e. the vector `d`
    /// with `∇·(A∇v) = A:∇²v + d·∇v`.
    pub fn divergence_at(&self, x: Point) -> [f64; 2] {
        match self {
            Coefficient::Constant(_) | Coefficient::Tensor(_) => [0.0, 0.0],
            Coefficient::Field { value, grad } => match grad {
                Some(g) => g(x),
                None => {
                    let h = 1e-6;
                    [
                        (value([x[0] + h, x[1]]) - value([x[0] - h, x[1]])) / (2.0 * h),
                        (value([x[0], x[1] + h]) - value([x[0], x[1] - h])) / (2.0 * h),
                    ]
                }
            },
        }
    }

    /// Checks positive definiteness (constants) or a positive lower bound at
    /// every quadrature point of `mesh` (fields).
    pub fn check_coercive(&self, mesh: &Mesh) -> Result<()> {
        match self {
            Coefficient::Constant(c) => {
                if !(*c > 0.0) {
                    return Err(Error::NotCoercive(format!("constant coefficient {c} is not positive")));
                }
            }
            Coefficient::Tensor(t) => {
                let sym = (t[0][1] - t[1][0]).abs() <= 1e-14 * (t[0][1].abs() + t[1][0].abs()).max(1.0);
                let det = t[0][0] * t[1][1] - t[0][1] * t[1][0];
                if !sym || !(t[0][0] > 0.0 && det > 0.0) {
                    return Err(Error::NotCoercive(format!("tensor {t:?} is not symmetric positive definite")));
                }
            }
            Coefficient::Field { value, .. } => {
                let rule = TriangleRule::degree5();
                for t in 0..mesh.n_triangles() {
                    let g = Geometry::new(mesh.coords(t));
                    for l in &rule.points {
                        let x = g.point(l);
                        let a = value(x);
                        if !(a > 0.0) {
                            return Err(Error::NotCoercive(format!("coefficient value {a} at ({}, {})", x[0], x[1])));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}
