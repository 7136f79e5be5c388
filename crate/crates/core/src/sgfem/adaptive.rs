use std::io::Write;
use std::sync::Arc;

use super::estimate::{estimate_sgfem, SgfemEstimate, SpatialEstimator};
use super::index::{MultiIndex, MultiIndexSet};
use super::{assemble_sgfem, solution_energy, solve_sgfem, SgfemProblem, SgfemSolution};
use crate::adapt::{mark_doerfler, marked_edges, ElementRefinement, Termination};
use crate::error::{Error, Result};
use crate::estimate::local::Subdivision;
use crate::fem::{FeSpace, Order};
use crate::mesh::{refine_leb, Mesh};

/// How the adaptive loop chooses between spatial and parametric refinement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SgfemVersion {
    /// Refine the component with the larger error estimate.
    V1,
    /// Refine the component with the larger estimated error reduction.
    #[default]
    V2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SgfemConfig {
    pub spatial: SpatialEstimator,
    pub subdivision: Subdivision,
    pub theta_x: f64,
    pub theta_p: f64,
    pub m_bar: usize,
    pub version: SgfemVersion,
    pub tol: f64,
    pub max_iter: usize,
    pub minres_tol: f64,
    pub minres_maxit: usize,
}

impl Default for SgfemConfig {
    fn default() -> Self {
        SgfemConfig {
            spatial: SpatialEstimator::Ees3Tensor,
            subdivision: Subdivision::Bisec3,
            theta_x: 0.7,
            theta_p: 0.9,
            m_bar: 1,
            version: SgfemVersion::V2,
            tol: 1.5e-2,
            max_iter: 60,
            minres_tol: 1e-10,
            minres_maxit: 200,
        }
    }
}

impl SgfemConfig {
    fn check(&self) -> Result<()> {
        for (name, v) in [("theta_x", self.theta_x), ("theta_p", self.theta_p)] {
            if !(v > 0.0 && v <= 1.0) {
                return Err(Error::InvalidArgument(format!("{name} = {v} must lie in (0, 1]")));
            }
        }
        if !(self.tol > 0.0) {
            return Err(Error::InvalidArgument(format!("tolerance {} must be positive", self.tol)));
        }
        if self.m_bar == 0 {
            return Err(Error::InvalidArgument("m_bar must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RefinementType {
    Spatial,
    Parametric,
}

impl RefinementType {
    pub fn as_str(self) -> &'static str {
        match self {
            RefinementType::Spatial => "spatial",
            RefinementType::Parametric => "parametric",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SgfemRecord {
    pub iter: usize,
    /// Free spatial dofs.
    pub n_x: usize,
    pub n_p: usize,
    pub eta: f64,
    pub e_x: f64,
    pub e_p: f64,
    pub refinement: Option<RefinementType>,
    pub minres_iters: usize,
    /// `B(u, u)` of the Galerkin solution.
    pub energy: f64,
    pub elements: usize,
    pub n_active: usize,
    /// Indices added after this iteration.
    pub added: Vec<MultiIndex>,
}

impl SgfemRecord {
    pub fn dofs(&self) -> usize {
        self.n_x * self.n_p
    }
}

#[derive(Debug, Clone)]
pub struct SgfemReport {
    pub records: Vec<SgfemRecord>,
    pub status: Termination,
    pub initial_set: MultiIndexSet,
}

impl SgfemReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "N_X", "N_P", "dofs", "eta", "eX", "eP", "refinement_type", "minres_iters"])?;
        for r in &self.records {
            out.write_record(&[
                r.iter.to_string(),
                r.n_x.to_string(),
                r.n_p.to_string(),
                r.dofs().to_string(),
                format!("{:.16e}", r.eta),
                format!("{:.16e}", r.e_x),
                format!("{:.16e}", r.e_p),
                r.refinement.map_or("none", RefinementType::as_str).to_string(),
                r.minres_iters.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn write_minres_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "minres_iters"])?;
        for r in &self.records {
            out.write_record(&[r.iter.to_string(), r.minres_iters.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// Index-set evolution: the iteration at which indices entered, then one
    /// index per line padded to the final number of active parameters.
    pub fn write_index_set<W: Write>(&self, mut w: W) -> Result<()> {
        let mut groups: Vec<(usize, Vec<MultiIndex>)> = vec![(0, self.initial_set.indices().to_vec())];
        for r in &self.records {
            if !r.added.is_empty() {
                groups.push((r.iter + 1, r.added.clone()));
            }
        }
        let width = groups.iter().flat_map(|g| g.1.iter()).map(MultiIndex::max_position).max().unwrap_or(0).max(1);
        for (iter, idx) in &groups {
            for (k, nu) in idx.iter().enumerate() {
                let label = if k == 0 { iter.to_string() } else { String::new() };
                writeln!(w, "{label:>4}  {}", nu.display_padded(width))?;
            }
        }
        Ok(())
    }

    pub fn etas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.eta).collect()
    }

    pub fn dofs(&self) -> Vec<usize> {
        self.records.iter().map(SgfemRecord::dofs).collect()
    }
}

pub struct SgfemOutcome {
    pub solution: SgfemSolution,
    pub estimate: SgfemEstimate,
    pub report: SgfemReport,
}

impl SgfemOutcome {
    pub fn mesh(&self) -> &Arc<Mesh> {
        self.solution.space.mesh()
    }
}

/// Adaptive stochastic Galerkin loop with P1 elements. Each iteration marks
/// edges (or elements) by Dörfler with `theta_x` and neighbourhood indices by
/// Dörfler with `theta_p`, then performs one of the two refinements.
pub fn adaptive_sgfem(problem: &SgfemProblem, mut mesh: Arc<Mesh>, initial: MultiIndexSet, cfg: &SgfemConfig) -> Result<SgfemOutcome> {
    cfg.check()?;
    let mut set = initial.clone();
    let mut records = Vec::new();
    for iter in 0.. {
        let space = Arc::new(FeSpace::new(mesh.clone(), Order::P1));
        let system = assemble_sgfem(problem, space, set.clone())?;
        let sol = solve_sgfem(&system, cfg.minres_tol, cfg.minres_maxit)?;
        let est = estimate_sgfem(problem, &sol, cfg.spatial, cfg.subdivision, cfg.m_bar, &system.stiffness, system.precond.factor())?;
        let mut rec = SgfemRecord {
            iter,
            n_x: sol.space.n_free(),
            n_p: set.len(),
            eta: est.eta,
            e_x: est.e_x,
            e_p: est.e_p,
            refinement: None,
            minres_iters: sol.minres_iterations,
            energy: solution_energy(&system, &sol),
            elements: mesh.n_triangles(),
            n_active: set.n_active(),
            added: Vec::new(),
        };
        let done = est.eta <= cfg.tol;
        if done || iter >= cfg.max_iter {
            records.push(rec);
            return Ok(SgfemOutcome {
                solution: sol,
                estimate: est,
                report: SgfemReport {
                    records,
                    status: if done { Termination::Converged } else { Termination::MaxIterations },
                    initial_set: initial,
                },
            });
        }
        let sx = mark_doerfler(&est.spatial.values, cfg.theta_x)?;
        let pv: Vec<f64> = est.parametric.iter().map(|p| p.1).collect();
        let sp = if pv.is_empty() { Vec::new() } else { mark_doerfler(&pv, cfg.theta_p)? };
        let spatial = match cfg.version {
            SgfemVersion::V1 => est.e_x >= est.e_p,
            SgfemVersion::V2 => {
                let rx: f64 = sx.iter().map(|&k| est.spatial.values[k].powi(2)).sum();
                let rp: f64 = sp.iter().map(|&k| pv[k].powi(2)).sum();
                rx >= rp
            }
        };
        if (spatial && !sx.is_empty()) || sp.is_empty() {
            let edges = marked_edges(est.spatial.carrier, ElementRefinement::ReferenceEdge, &sx, |t| sol.space.edges().triangle_edges(t));
            let (next, _) = refine_leb(&mesh, &edges)?;
            if next.n_triangles() == mesh.n_triangles() {
                records.push(rec);
                return Ok(SgfemOutcome {
                    solution: sol,
                    estimate: est,
                    report: SgfemReport {
                        records,
                        status: Termination::MaxIterations,
                        initial_set: initial,
                    },
                });
            }
            rec.refinement = Some(RefinementType::Spatial);
            mesh = Arc::new(next);
        } else {
            let added: Vec<MultiIndex> = sp.iter().map(|&k| est.parametric[k].0.clone()).collect();
            set = set.extended(&added)?;
            rec.refinement = Some(RefinementType::Parametric);
            rec.added = MultiIndexSet::new([vec![MultiIndex::zero()], added].concat())?.indices()[1..].to_vec();
        }
        records.push(rec);
    }
    unreachable!()
}

/// `B(u_ref, u_ref)` for the P2 Galerkin solution on `mesh` over
/// `set ∪ neighborhood(set, m_bar)`, and its number of dofs.
pub fn sgfem_reference_energy(problem: &SgfemProblem, mesh: Arc<Mesh>, set: &MultiIndexSet, m_bar: usize, minres_tol: f64) -> Result<(f64, usize)> {
    let enriched = set.extended(&set.neighborhood(m_bar))?;
    let space = Arc::new(FeSpace::new(mesh, Order::P2));
    let system = assemble_sgfem(problem, space, enriched)?;
    let sol = solve_sgfem(&system, minres_tol, 500)?;
    Ok((solution_energy(&system, &sol), sol.space.n_free() * sol.set.len()))
}
