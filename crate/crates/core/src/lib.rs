//! Adaptive finite element algorithms for elliptic problems on triangular
//! meshes: deterministic adaptivity, goal-oriented adaptivity and adaptive
//! stochastic Galerkin approximation of parametric diffusion problems.

pub mod adapt;
pub mod error;
pub mod estimate;
pub mod fem;
pub mod goal;
pub mod mesh;
pub mod presets;
pub mod quadrature;
pub mod sgfem;
pub mod sparse;

pub use error::{Error, Result};
pub use mesh::{generate_structured, refine_leb, uniform_refine, BoundaryMarker, DomainKind, EdgeTable, Mesh, UniformMode};
