//! Marking strategies and the adaptive SOLVE, ESTIMATE, MARK, REFINE loop.

mod marking;

pub use marking::{descending_order, mark_doerfler, mark_maximum, marked_edges, ElementRefinement, MarkingConfig, MarkingStrategy};

use std::io::Write;
use std::sync::Arc;
use std::time::Instant;

use crate::error::{Error, Result};
use crate::estimate::{estimate, ErrorIndicators, EstimatorConfig};
use crate::fem::{solve_deterministic, DeterministicProblem, FieldSolution, Order, SolveOutput};
use crate::mesh::{refine_leb, Mesh};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AdaptiveConfig {
    pub order: Order,
    pub estimator: EstimatorConfig,
    pub marking: MarkingConfig,
    pub tol: f64,
    pub max_iter: usize,
}

/// One pass of the loop. Times are in seconds.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iter: usize,
    pub dofs: usize,
    pub elements: usize,
    pub eta: f64,
    pub marked: usize,
    pub t_solve: f64,
    pub t_estimate: f64,
    pub t_mark: f64,
    pub t_refine: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Termination {
    Converged,
    MaxIterations,
}

#[derive(Debug, Clone)]
pub struct AdaptiveReport {
    pub records: Vec<IterationRecord>,
    pub status: Termination,
}

impl AdaptiveReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "dofs", "elements", "eta", "t_solve", "t_estimate", "t_mark", "t_refine"])?;
        for r in &self.records {
            out.write_record(&[
                r.iter.to_string(),
                r.dofs.to_string(),
                r.elements.to_string(),
                format!("{:.16e}", r.eta),
                format!("{:.6}", r.t_solve),
                format!("{:.6}", r.t_estimate),
                format!("{:.6}", r.t_mark),
                format!("{:.6}", r.t_refine),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn dofs(&self) -> Vec<usize> {
        self.records.iter().map(|r| r.dofs).collect()
    }

    pub fn etas(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.eta).collect()
    }
}

pub struct AdaptiveOutcome {
    pub solve: SolveOutput,
    pub indicators: ErrorIndicators,
    pub report: AdaptiveReport,
}

impl AdaptiveOutcome {
    pub fn solution(&self) -> &FieldSolution {
        &self.solve.solution
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        self.solve.solution.space.mesh()
    }
}

/// Runs the adaptive loop from `mesh` until the estimate drops to `tol` or
/// `max_iter` refinements have been made. Each iteration records the state
/// before refinement; the loop ends on the mesh whose estimate met `tol`.
pub fn adaptive_solve(problem: &DeterministicProblem, mesh: Arc<Mesh>, cfg: &AdaptiveConfig) -> Result<AdaptiveOutcome> {
    adaptive_solve_with(problem, mesh, cfg, |_, _| {})
}

/// As [`adaptive_solve`], calling `observe` after each estimate.
pub fn adaptive_solve_with(
    problem: &DeterministicProblem,
    mut mesh: Arc<Mesh>,
    cfg: &AdaptiveConfig,
    mut observe: impl FnMut(&IterationRecord, &FieldSolution),
) -> Result<AdaptiveOutcome> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", cfg.tol)));
    }
    cfg.marking.check()?;
    if cfg.marking.carrier != cfg.estimator.carrier {
        return Err(Error::InvalidArgument("marking and estimator carriers differ".into()));
    }
    problem.diffusion.check_coercive(&mesh)?;
    let mut records = Vec::new();
    for iter in 0.. {
        let t0 = Instant::now();
        let solve = solve_deterministic(problem, mesh.clone(), cfg.order)?;
        let t_solve = t0.elapsed().as_secs_f64();
        let t0 = Instant::now();
        let indicators = estimate(problem, &solve.solution, &cfg.estimator)?;
        let t_estimate = t0.elapsed().as_secs_f64();
        let mut rec = IterationRecord {
            iter,
            dofs: solve.solution.space.n_free(),
            elements: mesh.n_triangles(),
            eta: indicators.total,
            marked: 0,
            t_solve,
            t_estimate,
            t_mark: 0.0,
            t_refine: 0.0,
        };
        let done = indicators.total <= cfg.tol;
        if done || iter >= cfg.max_iter {
            observe(&rec, &solve.solution);
            records.push(rec);
            let status = if done { Termination::Converged } else { Termination::MaxIterations };
            return Ok(AdaptiveOutcome {
                solve,
                indicators,
                report: AdaptiveReport { records, status },
            });
        }
        let t0 = Instant::now();
        let marked = cfg.marking.mark(&indicators.values)?;
        let edges = marked_edges(indicators.carrier, cfg.marking.element_refinement, &marked, |t| {
            solve.solution.space.edges().triangle_edges(t)
        });
        rec.t_mark = t0.elapsed().as_secs_f64();
        rec.marked = marked.len();
        let t0 = Instant::now();
        let (next, _) = refine_leb(&mesh, &edges)?;
        rec.t_refine = t0.elapsed().as_secs_f64();
        observe(&rec, &solve.solution);
        records.push(rec);
        if next.n_triangles() == mesh.n_triangles() {
            // nothing marked: the loop cannot make progress
            let status = Termination::MaxIterations;
            return Ok(AdaptiveOutcome {
                solve,
                indicators,
                report: AdaptiveReport { records, status },
            });
        }
        mesh = Arc::new(next);
    }
    unreachable!()
}

/// Least-squares slope of `log y` against `log x` over the final half of the
/// samples (at least two).
pub fn fitted_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len().min(y.len());
    if n < 2 {
        return None;
    }
    let start = (n / 2).min(n - 2);
    let pts: Vec<(f64, f64)> = (start..n).map(|i| (x[i].ln(), y[i].ln())).collect();
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}
