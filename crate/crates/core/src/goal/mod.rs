//! Goal-oriented adaptivity for mollified point values.

mod combine;

pub use combine::{combine_markings, GoMark};

use std::io::Write;
use std::sync::Arc;

use crate::adapt::{mark_doerfler, Termination};
use crate::error::{Error, Result};
use crate::estimate::{estimate, Carrier, ErrorIndicators, EstimatorConfig, Strategy};
use crate::fem::element::Geometry;
use crate::fem::{assemble_weighted, solve_deterministic, DeterministicProblem, DiscreteSystem, FeSpace, FieldSolution, Order};
use crate::mesh::{refine_leb, segment_distance, uniform_refine, DomainKind, Mesh, Point, UniformMode};
use crate::quadrature::{gauss_legendre, TriangleRule};

/// `G(v) = ∫ g₀ v` with the mollifier
/// `g₀(x) = C exp(-r² / (r² - |x - x₀|²))` inside the disk of radius `r`
/// about `x₀`, normalised to unit integral.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoalFunctional {
    pub x0: Point,
    pub r: f64,
    pub c: f64,
}

/// `∫₀¹ exp(-1/u) du`.
fn bump_integral() -> f64 {
    let (x, w) = gauss_legendre(60);
    x.iter().zip(&w).map(|(x, w)| 0.5 * w * (-2.0 / (x + 1.0)).exp()).sum()
}

impl GoalFunctional {
    /// Mollifier about `x0`; the disk must lie inside `domain`.
    pub fn new(x0: Point, r: f64, domain: DomainKind) -> Result<Self> {
        if !(r > 0.0) || !domain.contains(x0) || domain.distance_to_boundary(x0) < r {
            return Err(Error::InvalidArgument(format!("disk of radius {r} about ({}, {}) is not inside the domain", x0[0], x0[1])));
        }
        // polar coordinates reduce ∫ g₀ to C π r² ∫₀¹ exp(-1/u) du
        let c = 1.0 / (std::f64::consts::PI * r * r * bump_integral());
        Ok(GoalFunctional { x0, r, c })
    }

    pub fn value(&self, x: Point) -> f64 {
        let d2 = (x[0] - self.x0[0]).powi(2) + (x[1] - self.x0[1]).powi(2);
        let r2 = self.r * self.r;
        if d2 >= r2 {
            0.0
        } else {
            self.c * (-r2 / (r2 - d2)).exp()
        }
    }

    fn misses(&self, p: &[Point; 3]) -> bool {
        let g = Geometry::new(*p);
        let l = g.barycentric(self.x0);
        if l.iter().all(|&v| v >= 0.0) {
            return false;
        }
        (0..3).all(|i| segment_distance(self.x0, p[i], p[(i + 1) % 3]) >= self.r)
    }

    /// Quadrature for `∫_K g₀ v`: the element is split uniformly until the
    /// pieces are small against `r`, and pieces meeting the disk get a
    /// collapsed Gauss rule. Weights include `g₀` and the area.
    pub fn element_points(&self, p: &[Point; 3]) -> Vec<([f64; 3], f64)> {
        if self.misses(p) {
            return Vec::new();
        }
        let g = Geometry::new(*p);
        let diam = (0..3).map(|i| g.edge_length(i)).fold(0.0, f64::max);
        let levels = ((diam / (0.125 * self.r)).log2().ceil().max(1.0) as u32).min(9);
        let rule = goal_rule();
        let mut cells = vec![[[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]];
        for _ in 0..levels {
            let mut next = Vec::with_capacity(4 * cells.len());
            for c in &cells {
                let m = |a: usize, b: usize| -> [f64; 3] { std::array::from_fn(|k| 0.5 * (c[a][k] + c[b][k])) };
                let (m01, m12, m20) = (m(0, 1), m(1, 2), m(2, 0));
                next.push([c[0], m01, m20]);
                next.push([m01, c[1], m12]);
                next.push([m20, m12, c[2]]);
                next.push([m12, m20, m01]);
            }
            cells = next;
        }
        let scale = g.area / cells.len() as f64;
        let mut out = Vec::new();
        for c in &cells {
            let corners = c.map(|l| g.point(&l));
            if self.misses(&corners) {
                continue;
            }
            for (lq, wq) in rule.points.iter().zip(&rule.weights) {
                let l: [f64; 3] = std::array::from_fn(|k| lq[0] * c[0][k] + lq[1] * c[1][k] + lq[2] * c[2][k]);
                let v = self.value(g.point(&l));
                if v > 0.0 {
                    out.push((l, wq * scale * v));
                }
            }
        }
        out
    }

    /// The vector `G(φ_i)` over all dofs of `space`.
    pub fn goal_vector(&self, space: &FeSpace) -> Vec<f64> {
        let mesh = space.mesh();
        assemble_weighted(space, &|t| self.element_points(&mesh.coords(t)))
    }

    /// `G(v)` for a finite element function.
    pub fn evaluate(&self, v: &FieldSolution) -> f64 {
        let g = self.goal_vector(&v.space);
        g.iter().zip(&v.values).map(|(a, b)| a * b).sum()
    }

    pub fn as_field(&self) -> crate::fem::Field {
        let s = *self;
        Arc::new(move |x| s.value(x))
    }
}

fn goal_rule() -> &'static TriangleRule {
    static RULE: std::sync::OnceLock<TriangleRule> = std::sync::OnceLock::new();
    RULE.get_or_init(|| TriangleRule::conical(8))
}

/// Dual Galerkin solution `B(v, z_h) = G(v)` with zero boundary values,
/// reusing the primal factorization (`B` is symmetric).
pub fn solve_dual(system: &DiscreteSystem, goal_vector: &[f64]) -> FieldSolution {
    let zero = vec![0.0; system.space.n_dofs()];
    FieldSolution {
        space: system.space.clone(),
        values: system.solve(goal_vector, &zero),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GoafemConfig {
    pub estimator: EstimatorConfig,
    pub theta: f64,
    pub combinator: GoMark,
    pub tol: f64,
    pub max_iter: usize,
    /// Compute the reference goal value on the final mesh refined twice uniformly.
    pub reference: bool,
}

impl Default for GoafemConfig {
    fn default() -> Self {
        GoafemConfig {
            estimator: EstimatorConfig::new(Strategy::Ees3, Carrier::Edges),
            theta: 0.3,
            combinator: GoMark::Go4,
            tol: 1e-4,
            max_iter: 100,
            reference: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GoafemRecord {
    pub iter: usize,
    pub dofs: usize,
    pub elements: usize,
    pub mu: f64,
    pub zeta: f64,
    pub goal_value: f64,
    pub ref_goal_error: Option<f64>,
    pub marked: usize,
}

impl GoafemRecord {
    pub fn mu_zeta(&self) -> f64 {
        self.mu * self.zeta
    }
}

#[derive(Debug, Clone)]
pub struct GoafemReport {
    pub records: Vec<GoafemRecord>,
    pub status: Termination,
    pub reference_goal: Option<f64>,
}

impl GoafemReport {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["iter", "dofs", "mu", "zeta", "mu_zeta", "goal_value", "ref_goal_error"])?;
        for r in &self.records {
            out.write_record(&[
                r.iter.to_string(),
                r.dofs.to_string(),
                format!("{:.16e}", r.mu),
                format!("{:.16e}", r.zeta),
                format!("{:.16e}", r.mu_zeta()),
                format!("{:.16e}", r.goal_value),
                r.ref_goal_error.map_or(String::new(), |e| format!("{e:.16e}")),
            ])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub struct GoafemOutcome {
    pub primal: FieldSolution,
    pub dual: FieldSolution,
    pub report: GoafemReport,
}

impl GoafemOutcome {
    pub fn mesh(&self) -> &Arc<Mesh> {
        self.primal.space.mesh()
    }
}

/// The dual problem: same operator, source `g₀`, homogeneous boundary data.
pub fn dual_problem(problem: &DeterministicProblem, goal: &GoalFunctional) -> DeterministicProblem {
    DeterministicProblem {
        domain: problem.domain,
        diffusion: problem.diffusion.clone(),
        source: goal.as_field(),
        dirichlet: Arc::new(|_| 0.0),
        neumann: None,
    }
}

/// Goal-oriented adaptive loop with P1 elements: primal and dual solves on
/// one mesh, both estimated with the same strategy, each marked by edge
/// Dörfler and combined. Stops when `μ ζ ≤ tol`.
pub fn goafem_solve(problem: &DeterministicProblem, goal: &GoalFunctional, mut mesh: Arc<Mesh>, cfg: &GoafemConfig) -> Result<GoafemOutcome> {
    if !(cfg.tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance {} must be positive", cfg.tol)));
    }
    if cfg.estimator.carrier != Carrier::Edges {
        return Err(Error::InvalidArgument("goal-oriented marking needs edge indicators".into()));
    }
    problem.diffusion.check_coercive(&mesh)?;
    let dual_pb = dual_problem(problem, goal);
    let mut records = Vec::new();
    for iter in 0.. {
        let primal = solve_deterministic(problem, mesh.clone(), Order::P1)?;
        let gvec = goal.goal_vector(&primal.solution.space);
        let dual = solve_dual(&primal.system, &gvec);
        let (mu, zeta) = rayon::join(
            || estimate(problem, &primal.solution, &cfg.estimator),
            || estimate(&dual_pb, &dual, &cfg.estimator),
        );
        let (mu, zeta): (ErrorIndicators, ErrorIndicators) = (mu?, zeta?);
        let goal_value: f64 = gvec.iter().zip(&primal.solution.values).map(|(a, b)| a * b).sum();
        let mut rec = GoafemRecord {
            iter,
            dofs: primal.solution.space.n_free(),
            elements: mesh.n_triangles(),
            mu: mu.total,
            zeta: zeta.total,
            goal_value,
            ref_goal_error: None,
            marked: 0,
        };
        let done = rec.mu_zeta() <= cfg.tol;
        if done || iter >= cfg.max_iter {
            records.push(rec);
            let status = if done { Termination::Converged } else { Termination::MaxIterations };
            let mut report = GoafemReport {
                records,
                status,
                reference_goal: None,
            };
            if cfg.reference {
                let fine = uniform_refine(&uniform_refine(&mesh, UniformMode::Bisec3), UniformMode::Bisec3);
                let r = solve_deterministic(problem, Arc::new(fine), Order::P1)?;
                let g_ref = goal.evaluate(&r.solution);
                for rec in &mut report.records {
                    rec.ref_goal_error = Some((g_ref - rec.goal_value).abs());
                }
                report.reference_goal = Some(g_ref);
            }
            return Ok(GoafemOutcome {
                primal: primal.solution,
                dual,
                report,
            });
        }
        let mu_set = mark_doerfler(&mu.values, cfg.theta)?;
        let z_set = mark_doerfler(&zeta.values, cfg.theta)?;
        let marked = combine_markings(&mu_set, &z_set, cfg.combinator, &mu.values, &zeta.values, mu.total, zeta.total, cfg.theta)?;
        rec.marked = marked.len();
        records.push(rec);
        let (next, _) = refine_leb(&mesh, &marked)?;
        mesh = Arc::new(next);
    }
    unreachable!()
}

#[cfg(test)]
mod tests;
