//! Stochastic Galerkin approximation of `-∇·(a(x, y)∇u) = f` with an affine
//! parametric coefficient and homogeneous Dirichlet data.

mod adaptive;
mod coefficient;
mod estimate;
mod index;
mod measure;

pub use adaptive::{adaptive_sgfem, sgfem_reference_energy, RefinementType, SgfemConfig, SgfemOutcome, SgfemRecord, SgfemReport, SgfemVersion};
pub use coefficient::{exponential_kernel_modes, fourier_indices, riemann_zeta, ExpansionKind, KlMode1d, ParametricCoefficient};
pub use estimate::{estimate_parametric, estimate_sgfem, estimate_spatial, SgfemEstimate, SpatialEstimator};
pub use index::{MultiIndex, MultiIndexSet};
pub use measure::{MeasureFamily, Recurrence};

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fem::{assemble_load, assemble_stiffness, FeSpace, Field};
use crate::mesh::{DomainKind, Point};
use crate::sparse::{minres, KroneckerSumOperator, MeanPreconditioner, SparseMatrix};

/// Highest polynomial degree per parameter supported by the recurrence.
const MAX_DEGREE: usize = 64;

#[derive(Clone)]
pub struct SgfemProblem {
    pub domain: DomainKind,
    pub coeff: ParametricCoefficient,
    pub measure: MeasureFamily,
    pub recurrence: Recurrence,
    pub source: Field,
}

impl std::fmt::Debug for SgfemProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SgfemProblem")
            .field("domain", &self.domain)
            .field("coeff", &self.coeff.kind)
            .field("measure", &self.measure)
            .finish_non_exhaustive()
    }
}

impl SgfemProblem {
    pub fn new(domain: DomainKind, coeff: ParametricCoefficient, measure: MeasureFamily, source: Field) -> Result<Self> {
        Ok(SgfemProblem {
            domain,
            coeff,
            measure,
            recurrence: measure.recurrence(MAX_DEGREE)?,
            source,
        })
    }

    /// Standard deviation of each parameter under `measure`.
    pub fn param_std(measure: MeasureFamily) -> Result<f64> {
        Ok(measure.recurrence(1)?.beta(1))
    }
}

/// Stiffness matrices `K_0..K_M` on the full dof set of one space.
pub fn assemble_stiffness_terms(problem: &SgfemProblem, space: &FeSpace, terms: std::ops::RangeInclusive<usize>) -> Result<Vec<SparseMatrix>> {
    terms.map(|m| assemble_stiffness(space, &problem.coeff.coefficient(m))).collect()
}

/// The Galerkin system `(Σ_m G_m ⊗ K_m) u = b` on the free dofs.
pub struct SgfemSystem {
    pub space: Arc<FeSpace>,
    pub set: MultiIndexSet,
    /// `K_0..K_{M_P}` on the full dof set.
    pub stiffness: Vec<SparseMatrix>,
    pub load: Vec<f64>,
    pub operator: KroneckerSumOperator,
    pub precond: MeanPreconditioner,
    pub rhs: Vec<f64>,
}

pub fn assemble_sgfem(problem: &SgfemProblem, space: Arc<FeSpace>, set: MultiIndexSet) -> Result<SgfemSystem> {
    let m_p = set.n_active();
    problem.coeff.check(m_p)?;
    if set.max_degree() as usize >= MAX_DEGREE {
        return Err(Error::InvalidArgument(format!("polynomial degree above {}", MAX_DEGREE - 1)));
    }
    let stiffness = assemble_stiffness_terms(problem, &space, 0..=m_p)?;
    let load = assemble_load(&space, &*problem.source)?;
    let nf = space.n_free();
    let fp = space.free_pos();
    let terms: Vec<(SparseMatrix, SparseMatrix)> = stiffness
        .par_iter()
        .enumerate()
        .map(|(m, k)| (problem.recurrence.build_g(&set, m), k.submatrix(fp, nf, fp, nf)))
        .collect();
    let precond = MeanPreconditioner::new(&terms[0].1, set.len())?;
    let operator = KroneckerSumOperator::new(terms)?;
    // ⟨1, P_ν⟩ = δ_{ν0}: only the zero-index block is loaded
    let mut rhs = vec![0.0; nf * set.len()];
    for (k, &i) in space.free().iter().enumerate() {
        rhs[k] = load[i];
    }
    Ok(SgfemSystem {
        space,
        set,
        stiffness,
        load,
        operator,
        precond,
        rhs,
    })
}

/// Coefficients `u_ij` of `Σ_ij u_ij φ_i P_κ(j)`, stored column by column over
/// the full dof set (zero at Dirichlet dofs).
#[derive(Debug, Clone)]
pub struct SgfemSolution {
    pub space: Arc<FeSpace>,
    pub set: MultiIndexSet,
    pub values: Vec<f64>,
    pub minres_iterations: usize,
}

impl SgfemSolution {
    pub fn n_x(&self) -> usize {
        self.space.n_dofs()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let n = self.n_x();
        &self.values[j * n..(j + 1) * n]
    }

    /// The mean field (zero-index column).
    pub fn mean(&self) -> &[f64] {
        self.column(0)
    }

    /// Pointwise variance `Σ_{ν≠0} u_ν(x)²` at the dofs.
    pub fn variance(&self) -> Vec<f64> {
        (0..self.n_x()).map(|i| (1..self.set.len()).map(|j| self.column(j)[i].powi(2)).sum()).collect()
    }

    /// Writes `dofs N` followed by one `x y mean variance` line per dof.
    pub fn write_text<W: std::io::Write>(&self, mut w: W) -> Result<()> {
        let coords = self.space.dof_coords();
        writeln!(w, "dofs {}", coords.len())?;
        for ((p, m), v) in coords.iter().zip(self.mean()).zip(self.variance()) {
            writeln!(w, "{:.16e} {:.16e} {:.16e} {:.16e}", p[0], p[1], m, v)?;
        }
        Ok(())
    }

    /// `u(x, y)` at a parameter vector `y`.
    pub fn evaluate(&self, x: Point, y: &[f64], rec: &Recurrence) -> Result<f64> {
        let (t, l) = self.space.locate(x)?;
        let d = self.space.dofs(t);
        let n = self.space.order().local_dofs();
        let mut phi = [0.0; 6];
        crate::fem::element::shape(self.space.order(), &l, &mut phi);
        let mut s = 0.0;
        for (j, nu) in self.set.indices().iter().enumerate() {
            let p: f64 = nu.entries().iter().map(|&(m, k)| rec.eval(k as usize, y.get(m - 1).copied().unwrap_or(0.0))[k as usize]).product();
            let col = self.column(j);
            s += p * (0..n).map(|i| phi[i] * col[d[i]]).sum::<f64>();
        }
        Ok(s)
    }
}

/// Preconditioned MINRES on the assembled system.
pub fn solve_sgfem(system: &SgfemSystem, tol: f64, maxit: usize) -> Result<SgfemSolution> {
    let res = minres(&system.operator, &system.rhs, &system.precond, tol, maxit)?;
    if !res.converged {
        return Err(Error::MaxIterations(maxit));
    }
    let space = &system.space;
    let (n, nf) = (space.n_dofs(), space.n_free());
    let mut values = vec![0.0; n * system.set.len()];
    for j in 0..system.set.len() {
        for (k, &i) in space.free().iter().enumerate() {
            values[j * n + i] = res.x[j * nf + k];
        }
    }
    Ok(SgfemSolution {
        space: space.clone(),
        set: system.set.clone(),
        values,
        minres_iterations: res.iterations,
    })
}

/// `F(u) = B(u, u)` for the Galerkin solution.
pub fn solution_energy(system: &SgfemSystem, sol: &SgfemSolution) -> f64 {
    system.load.iter().zip(sol.mean()).map(|(a, b)| a * b).sum()
}
