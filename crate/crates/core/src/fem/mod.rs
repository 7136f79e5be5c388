//! P1/P2 finite element spaces, assembly, boundary conditions and the
//! deterministic solve.

mod coefficient;
pub mod element;
mod output;
mod space;

use std::sync::Arc;

use rayon::prelude::*;

pub use coefficient::{Coefficient, Field, GradField};
pub use space::{FeSpace, Order};

use crate::error::{Error, Result};
use crate::mesh::{BoundaryMarker, DomainKind, Mesh, Point};
use crate::quadrature::gauss_legendre;
use crate::sparse::{SparseMatrix, SpdFactor, TripletBuilder};
use element::{element_load, element_stiffness, shape};

/// Stiffness matrix on the full dof set.
pub fn assemble_stiffness(space: &FeSpace, coeff: &Coefficient) -> Result<SparseMatrix> {
    let n = space.order().local_dofs();
    let mesh = space.mesh();
    let locals: Vec<[[f64; 6]; 6]> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let g = space.geometry(t);
            if !(g.area > 0.0) {
                return Err(Error::DegenerateTriangle(t));
            }
            Ok(element_stiffness(space.order(), &g, coeff))
        })
        .collect::<Result<_>>()?;
    let mut b = TripletBuilder::with_capacity(n * n * locals.len());
    for (t, k) in locals.iter().enumerate() {
        let d = space.dofs(t);
        for i in 0..n {
            for j in 0..n {
                b.push(d[i], d[j], k[i][j]);
            }
        }
    }
    Ok(b.build(space.n_dofs(), space.n_dofs()))
}

/// Load vector `∫ f φ_i` on the full dof set.
pub fn assemble_load(space: &FeSpace, f: &(dyn Fn(Point) -> f64 + Sync)) -> Result<Vec<f64>> {
    let n = space.order().local_dofs();
    let locals: Vec<[f64; 6]> = (0..space.mesh().n_triangles())
        .into_par_iter()
        .map(|t| {
            element_load(space.order(), &space.geometry(t), &f).map_err(|(value, x)| Error::NonFinite {
                value,
                x: x[0],
                y: x[1],
            })
        })
        .collect::<Result<_>>()?;
    let mut b = vec![0.0; space.n_dofs()];
    for (t, l) in locals.iter().enumerate() {
        let d = space.dofs(t);
        for i in 0..n {
            b[d[i]] += l[i];
        }
    }
    Ok(b)
}

/// Functional `Σ_q w_q φ_i(x_q)` from caller-supplied weighted points per
/// element (barycentric point, absolute weight including the integrand).
pub fn assemble_weighted(space: &FeSpace, points: &(dyn Fn(usize) -> Vec<([f64; 3], f64)> + Sync)) -> Vec<f64> {
    let n = space.order().local_dofs();
    let locals: Vec<(usize, [f64; 6])> = (0..space.mesh().n_triangles())
        .into_par_iter()
        .filter_map(|t| {
            let pts = points(t);
            if pts.is_empty() {
                return None;
            }
            let mut loc = [0.0; 6];
            let mut phi = [0.0; 6];
            for (l, w) in pts {
                shape(space.order(), &l, &mut phi);
                for i in 0..n {
                    loc[i] += w * phi[i];
                }
            }
            Some((t, loc))
        })
        .collect();
    let mut b = vec![0.0; space.n_dofs()];
    for (t, l) in locals {
        let d = space.dofs(t);
        for i in 0..n {
            b[d[i]] += l[i];
        }
    }
    b
}

/// Adds `∫_{Γ_N} g φ_i` over Neumann edges.
pub fn add_neumann_load(space: &FeSpace, g: &dyn Fn(Point) -> f64, b: &mut [f64]) {
    let mesh = space.mesh();
    let (x, w) = gauss_legendre(3);
    let n = space.order().local_dofs();
    let mut phi = [0.0; 6];
    for t in 0..mesh.n_triangles() {
        let tri = mesh.triangles()[t];
        let geom = space.geometry(t);
        let d = space.dofs(t);
        for i in 0..3 {
            let (a, c) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
            if mesh.boundary_marker(a, c) != Some(BoundaryMarker::Neumann) {
                continue;
            }
            let len = geom.edge_length(i);
            for (xq, wq) in x.iter().zip(&w) {
                let s = 0.5 * (xq + 1.0);
                let mut l = [0.0; 3];
                l[(i + 1) % 3] = 1.0 - s;
                l[(i + 2) % 3] = s;
                let gx = g(geom.point(&l));
                shape(space.order(), &l, &mut phi);
                for k in 0..n {
                    b[d[k]] += 0.5 * wq * len * gx * phi[k];
                }
            }
        }
    }
}

/// Boundary value problem `-∇·(A∇u) = f` with Dirichlet data `g` and
/// optional Neumann data.
#[derive(Clone)]
pub struct DeterministicProblem {
    pub domain: DomainKind,
    pub diffusion: Coefficient,
    pub source: Field,
    pub dirichlet: Field,
    pub neumann: Option<Field>,
}

impl std::fmt::Debug for DeterministicProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DeterministicProblem")
            .field("domain", &self.domain)
            .field("diffusion", &self.diffusion)
            .finish_non_exhaustive()
    }
}

impl DeterministicProblem {
    pub fn new(domain: DomainKind, diffusion: Coefficient, source: Field) -> Self {
        DeterministicProblem {
            domain,
            diffusion,
            source,
            dirichlet: Arc::new(|_| 0.0),
            neumann: None,
        }
    }

    pub fn with_dirichlet(mut self, g: Field) -> Self {
        self.dirichlet = g;
        self
    }

    pub fn with_neumann(mut self, g: Field) -> Self {
        self.neumann = Some(g);
        self
    }
}

/// Assembled and factorized Galerkin system on one space.
pub struct DiscreteSystem {
    pub space: Arc<FeSpace>,
    pub stiffness: SparseMatrix,
    pub k_free: SparseMatrix,
    pub factor: SpdFactor,
}

impl DiscreteSystem {
    pub fn new(space: Arc<FeSpace>, coeff: &Coefficient) -> Result<Self> {
        let stiffness = assemble_stiffness(&space, coeff)?;
        let nf = space.n_free();
        let k_free = stiffness.submatrix(space.free_pos(), nf, space.free_pos(), nf);
        let factor = SpdFactor::new(&k_free)?;
        Ok(DiscreteSystem {
            space,
            stiffness,
            k_free,
            factor,
        })
    }

    /// Free-dof right-hand side `b_F - K_FD g_D` for full load `load` and full
    /// vector `boundary` carrying the Dirichlet values.
    pub fn reduced_rhs(&self, load: &[f64], boundary: &[f64]) -> Vec<f64> {
        let lifted = self.stiffness.mul_vec(boundary);
        self.space.free().iter().map(|&i| load[i] - lifted[i]).collect()
    }

    /// Solves with full load vector `load` and Dirichlet values taken from
    /// `boundary` at fixed dofs.
    pub fn solve(&self, load: &[f64], boundary: &[f64]) -> Vec<f64> {
        let space = &self.space;
        let mut g = vec![0.0; space.n_dofs()];
        for i in 0..space.n_dofs() {
            if space.is_fixed(i) {
                g[i] = boundary[i];
            }
        }
        let rhs = self.reduced_rhs(load, &g);
        let x = self.factor.solve(&rhs);
        for (k, &i) in space.free().iter().enumerate() {
            g[i] = x[k];
        }
        g
    }
}

/// A finite element function.
#[derive(Debug, Clone)]
pub struct FieldSolution {
    pub space: Arc<FeSpace>,
    pub values: Vec<f64>,
}

impl FieldSolution {
    pub fn evaluate(&self, x: Point) -> Result<f64> {
        let (t, l) = self.space.locate(x)?;
        Ok(self.evaluate_in(t, &l))
    }

    /// Value at barycentric point `l` of triangle `t`.
    pub fn evaluate_in(&self, t: usize, l: &[f64; 3]) -> f64 {
        let mut phi = [0.0; 6];
        shape(self.space.order(), l, &mut phi);
        let d = self.space.dofs(t);
        (0..self.space.order().local_dofs()).map(|i| phi[i] * self.values[d[i]]).sum()
    }

    /// `B(u, u)` for the given full stiffness matrix.
    pub fn energy(&self, stiffness: &SparseMatrix) -> f64 {
        stiffness.quad_form(&self.values, &self.values)
    }

    /// Interpolates this function into `target`, whose mesh must refine this one.
    pub fn prolong(&self, target: &Arc<FeSpace>) -> Result<FieldSolution> {
        let coarse = self.space.mesh();
        let fine = target.mesh();
        if fine.n_vertices() < coarse.n_vertices() || fine.vertices()[..coarse.n_vertices()] != *coarse.vertices() {
            return Err(Error::NotNested);
        }
        let values = target
            .dof_coords()
            .par_iter()
            .enumerate()
            .map(|(i, &x)| {
                if i < coarse.n_vertices() {
                    Ok(self.values[i])
                } else {
                    self.evaluate(x).map_err(|_| Error::NotNested)
                }
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(FieldSolution {
            space: target.clone(),
            values,
        })
    }
}

/// Energy norm of `fine - coarse`, with `coarse` prolonged by nestedness.
pub fn energy_error(fine: &FieldSolution, coarse: &FieldSolution, coeff: &Coefficient) -> Result<f64> {
    let p = coarse.prolong(&fine.space)?;
    let e: Vec<f64> = p.values.iter().zip(&fine.values).map(|(a, b)| a - b).collect();
    let k = assemble_stiffness(&fine.space, coeff)?;
    Ok(k.quad_form(&e, &e).max(0.0).sqrt())
}

/// Result of a deterministic solve, keeping the factorized system for reuse.
pub struct SolveOutput {
    pub solution: FieldSolution,
    pub system: DiscreteSystem,
    pub load: Vec<f64>,
}

/// Galerkin solve of `problem` on `mesh` with elements of `order`.
pub fn solve_deterministic(problem: &DeterministicProblem, mesh: Arc<Mesh>, order: Order) -> Result<SolveOutput> {
    let space = Arc::new(FeSpace::new(mesh, order));
    let system = DiscreteSystem::new(space.clone(), &problem.diffusion)?;
    let mut load = assemble_load(&space, &*problem.source)?;
    if let Some(g) = &problem.neumann {
        add_neumann_load(&space, &**g, &mut load);
    }
    let boundary = space.interpolate(&*problem.dirichlet);
    let values = system.solve(&load, &boundary);
    Ok(SolveOutput {
        solution: FieldSolution { space, values },
        system,
        load,
    })
}
