use std::collections::HashMap;

use rayon::prelude::*;

use super::index::MultiIndex;
use super::{assemble_stiffness_terms, SgfemProblem, SgfemSolution};
use crate::error::{Error, Result};
use crate::estimate::hierarchical::fine_values;
use crate::estimate::local::{LocalSpace, Subdivision};
use crate::estimate::{is_dirichlet, Bubble, Carrier, ErrorIndicators};
use crate::fem::Order;
use crate::sparse::{SparseMatrix, SpdFactor};

/// Spatial error estimators for stochastic Galerkin solutions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SpatialEstimator {
    /// Two-level edge indicators against `B_0`.
    Ees3Tensor,
    /// Local residual problems on `Y|_K ⊗ P` with the `B_{0,K}` form.
    Ees1Tensor(Bubble),
}

impl SpatialEstimator {
    pub fn carrier(self) -> Carrier {
        match self {
            SpatialEstimator::Ees3Tensor => Carrier::Edges,
            SpatialEstimator::Ees1Tensor(_) => Carrier::Elements,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SgfemEstimate {
    pub spatial: ErrorIndicators,
    /// `(ν, ‖e_P^(ν)‖_0)` for `ν` in the neighbourhood.
    pub parametric: Vec<(MultiIndex, f64)>,
    pub e_x: f64,
    pub e_p: f64,
    pub eta: f64,
}

fn check_p1(sol: &SgfemSolution) -> Result<()> {
    if sol.space.order() != Order::P1 {
        return Err(Error::InvalidArgument("stochastic error estimation needs P1 elements".into()));
    }
    Ok(())
}

/// `Σ_m Σ_μ [G_m]_{νμ} x_{m,μ}` as sparse rows: for every `ν ∈ P`, the list of
/// `(m, μ, g)` couplings including `m = 0`.
fn couplings(problem: &SgfemProblem, sol: &SgfemSolution) -> Vec<Vec<(usize, usize, f64)>> {
    let set = &sol.set;
    let m_p = set.n_active();
    set.indices()
        .iter()
        .enumerate()
        .map(|(t, nu)| {
            let mut row = vec![(0, t, 1.0)];
            for m in 1..=m_p {
                for up in [true, false] {
                    if let Some(mu) = nu.shifted(m, up) {
                        if let Some(j) = set.position(&mu) {
                            row.push((m, j, problem.recurrence.beta(nu.get(m).max(mu.get(m)) as usize)));
                        }
                    }
                }
            }
            row
        })
        .collect()
}

fn local_column(sol: &SgfemSolution, t: usize, j: usize) -> [f64; 6] {
    let d = sol.space.dofs(t);
    let col = sol.column(j);
    let mut u = [0.0; 6];
    for i in 0..3 {
        u[i] = col[d[i]];
    }
    u
}

/// Spatial indicators; the total is `‖e_X‖_0`.
pub fn estimate_spatial(problem: &SgfemProblem, sol: &SgfemSolution, strategy: SpatialEstimator, sub: Subdivision) -> Result<ErrorIndicators> {
    check_p1(sol)?;
    match strategy {
        SpatialEstimator::Ees3Tensor => ees3_tensor(problem, sol, sub),
        SpatialEstimator::Ees1Tensor(b) => ees1_tensor(problem, sol, b, sub),
    }
}

fn ees3_tensor(problem: &SgfemProblem, sol: &SgfemSolution, sub: Subdivision) -> Result<ErrorIndicators> {
    let space = &sol.space;
    let mesh = space.mesh();
    let edges = space.edges();
    let n_p = sol.set.len();
    let m_p = sol.set.n_active();
    let coeffs: Vec<_> = (0..=m_p).map(|m| problem.coeff.coefficient(m)).collect();
    let rows = couplings(problem, sol);
    let local = LocalSpace::fine_p1(sub);
    // per element: residuals r[ν][i] at the three midpoint hats and the a_0 diagonal
    let details: Vec<(Vec<[f64; 3]>, [f64; 3])> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let g = space.geometry(t);
            let f = local.load(&g, &|_, x| (problem.source)(x))?;
            let ks: Vec<Vec<f64>> = coeffs.iter().map(|c| local.stiffness(&g, c)).collect();
            // (K_m u_μ) at the midpoint rows, for every m and μ
            let mut ku = vec![[0.0; 3]; (m_p + 1) * n_p];
            for j in 0..n_p {
                let uf = fine_values(&local_column(sol, t, j));
                for (m, k) in ks.iter().enumerate() {
                    for r in 0..3 {
                        ku[m * n_p + j][r] = k[(3 + r) * 6..(4 + r) * 6].iter().zip(&uf).map(|(a, b)| a * b).sum();
                    }
                }
            }
            let res = rows
                .iter()
                .enumerate()
                .map(|(nu, row)| {
                    let mut r = if nu == 0 { [f[3], f[4], f[5]] } else { [0.0; 3] };
                    for &(m, j, gv) in row {
                        for i in 0..3 {
                            r[i] -= gv * ku[m * n_p + j][i];
                        }
                    }
                    r
                })
                .collect();
            let k0 = &ks[0];
            Ok((res, [k0[3 * 6 + 3], k0[4 * 6 + 4], k0[5 * 6 + 5]]))
        })
        .collect::<Result<_>>()?;
    let mut r = vec![0.0; edges.len() * n_p];
    let mut d = vec![0.0; edges.len()];
    for (t, (res, diag)) in details.iter().enumerate() {
        for (i, e) in edges.triangle_edges(t).into_iter().enumerate() {
            d[e] += diag[i];
            for nu in 0..n_p {
                r[e * n_p + nu] += res[nu][i];
            }
        }
    }
    let values = (0..edges.len())
        .map(|e| {
            let [a, b] = edges.edges()[e];
            if is_dirichlet(mesh, a, b) {
                0.0
            } else {
                (r[e * n_p..(e + 1) * n_p].iter().map(|v| v * v).sum::<f64>() / d[e]).sqrt()
            }
        })
        .collect();
    Ok(ErrorIndicators::from_values(Carrier::Edges, values))
}

/// Cholesky factor of a small SPD matrix, in place (lower triangle).
fn small_cholesky(a: &mut [f64], n: usize) -> bool {
    for j in 0..n {
        let mut s = a[j * n + j];
        for k in 0..j {
            s -= a[j * n + k] * a[j * n + k];
        }
        if !(s > 0.0) {
            return false;
        }
        let l = s.sqrt();
        a[j * n + j] = l;
        for i in j + 1..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = s / l;
        }
    }
    true
}

fn small_solve(l: &[f64], n: usize, b: &mut [f64]) {
    for i in 0..n {
        let s: f64 = (0..i).map(|k| l[i * n + k] * b[k]).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| l[k * n + i] * b[k]).sum();
        b[i] = (b[i] - s) / l[i * n + i];
    }
}

fn ees1_tensor(problem: &SgfemProblem, sol: &SgfemSolution, bubble: Bubble, sub: Subdivision) -> Result<ErrorIndicators> {
    let local = match bubble {
        Bubble::Linear => LocalSpace::fine_p1(sub),
        Bubble::Quadratic => LocalSpace::lagrange(2),
        Bubble::Quartic => return Err(Error::InvalidArgument("quartic bubbles need P2 elements".into())),
    };
    let space = &sol.space;
    let mesh = space.mesh();
    let edges = space.edges();
    let n_p = sol.set.len();
    let m_p = sol.set.n_active();
    let rows = couplings(problem, sol);
    // W[t][m n_p + ν] = Σ_μ [G_m]_{νμ} ∇u_μ|_t
    let w: Vec<Vec<[f64; 2]>> = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let g = space.geometry(t);
            let grads: Vec<[f64; 2]> = (0..n_p)
                .map(|j| {
                    let u = local_column(sol, t, j);
                    let mut gr = [0.0; 2];
                    for i in 0..3 {
                        gr[0] += u[i] * g.grad[i][0];
                        gr[1] += u[i] * g.grad[i][1];
                    }
                    gr
                })
                .collect();
            let mut out = vec![[0.0; 2]; (m_p + 1) * n_p];
            for (nu, row) in rows.iter().enumerate() {
                for &(m, j, gv) in row {
                    out[m * n_p + nu][0] += gv * grads[j][0];
                    out[m * n_p + nu][1] += gv * grads[j][1];
                }
            }
            out
        })
        .collect();
    let a0 = problem.coeff.coefficient(0);
    let values = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let g = space.geometry(t);
            let tri = mesh.triangles()[t];
            let mut dirichlet = [false; 3];
            let mut nbr = [None; 3];
            for i in 0..3 {
                dirichlet[i] = is_dirichlet(mesh, tri[(i + 1) % 3], tri[(i + 2) % 3]);
                nbr[i] = edges.neighbour(edges.edge_of_triangle(t, i), t);
            }
            let active: Vec<usize> = local.bubbles.iter().copied().filter(|&k| local.edge_of[k].map_or(true, |i| !dirichlet[i])).collect();
            let na = active.len();
            if na == 0 {
                return Ok(0.0);
            }
            let k = local.stiffness(&g, &a0);
            let mut l = vec![0.0; na * na];
            for (r, &i) in active.iter().enumerate() {
                for (c, &j) in active.iter().enumerate() {
                    l[r * na + c] = k[i * local.n + j];
                }
            }
            if !small_cholesky(&mut l, na) {
                return Err(Error::SingularLocalSystem(t));
            }
            let wt = &w[t];
            let mut total = 0.0;
            for nu in 0..n_p {
                let mut rhs = local.load(&g, &|_, x| {
                    let mut s = if nu == 0 { (problem.source)(x) } else { 0.0 };
                    for m in 1..=m_p {
                        let (_, da) = problem.coeff.term(m, x);
                        let v = wt[m * n_p + nu];
                        s += da[0] * v[0] + da[1] * v[1];
                    }
                    s
                })?;
                for i in 0..3 {
                    let Some(t2) = nbr[i] else { continue };
                    if dirichlet[i] {
                        continue;
                    }
                    let n = g.normal(i);
                    let w2 = &w[t2];
                    local.add_edge_load(
                        &g,
                        i,
                        &|_, x| {
                            let mut s = 0.0;
                            for m in 0..=m_p {
                                let a = problem.coeff.term(m, x).0;
                                let (v1, v2) = (wt[m * n_p + nu], w2[m * n_p + nu]);
                                s += a * ((v1[0] - v2[0]) * n[0] + (v1[1] - v2[1]) * n[1]);
                            }
                            -0.5 * s
                        },
                        &mut rhs,
                    );
                }
                let mut b: Vec<f64> = active.iter().map(|&i| rhs[i]).collect();
                let r = b.clone();
                small_solve(&l, na, &mut b);
                total += b.iter().zip(&r).map(|(x, y)| x * y).sum::<f64>();
            }
            Ok(total.max(0.0).sqrt())
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ErrorIndicators::from_values(Carrier::Elements, values))
}

/// Parametric indicators `‖e_P^(ν)‖_0` for `ν ∈ q`, with
/// `B_0(e, v P_ν) = -Σ_m Σ_μ ⟨y_m P_μ, P_ν⟩ B_m(u_μ, v)`. `k0` is the factored
/// free block of `K_0`; `stiffness` holds `K_0..K_M` on the full dof set with
/// `M` at least the largest position in `q`.
pub fn estimate_parametric(problem: &SgfemProblem, sol: &SgfemSolution, q: &[MultiIndex], stiffness: &[SparseMatrix], k0: &SpdFactor) -> Result<Vec<f64>> {
    let space = &sol.space;
    let set = &sol.set;
    let m_max = q.iter().map(MultiIndex::max_position).max().unwrap_or(0);
    if stiffness.len() <= m_max {
        return Err(Error::DimensionMismatch { expected: m_max + 1, got: stiffness.len() });
    }
    if let Some(nu) = q.iter().find(|nu| set.contains(nu)) {
        return Err(Error::InvalidArgument(format!("{nu} already belongs to the index set")));
    }
    let links: Vec<Vec<(usize, usize, f64)>> = q
        .iter()
        .map(|nu| {
            let mut out = Vec::new();
            for m in 1..=m_max {
                for up in [true, false] {
                    if let Some(mu) = nu.shifted(m, up) {
                        if let Some(j) = set.position(&mu) {
                            out.push((m, j, problem.recurrence.beta(nu.get(m).max(mu.get(m)) as usize)));
                        }
                    }
                }
            }
            out
        })
        .collect();
    let mut needed: Vec<(usize, usize)> = links.iter().flatten().map(|&(m, j, _)| (m, j)).collect();
    needed.sort_unstable();
    needed.dedup();
    let products: HashMap<(usize, usize), Vec<f64>> = needed.par_iter().map(|&(m, j)| ((m, j), stiffness[m].mul_vec(sol.column(j)))).collect();
    let free = space.free();
    links
        .par_iter()
        .map(|row| {
            let mut rhs = vec![0.0; free.len()];
            for &(m, j, b) in row {
                let p = &products[&(m, j)];
                for (k, &i) in free.iter().enumerate() {
                    rhs[k] -= b * p[i];
                }
            }
            let e = k0.solve(&rhs);
            Ok(e.iter().zip(&rhs).map(|(a, b)| a * b).sum::<f64>().max(0.0).sqrt())
        })
        .collect()
}

/// Spatial and parametric estimates with the neighbourhood of `sol.set`
/// built with `m_bar` extra parameters. `stiffness` must cover `K_0..K_{M_P}`;
/// missing higher terms are assembled here.
pub fn estimate_sgfem(
    problem: &SgfemProblem,
    sol: &SgfemSolution,
    strategy: SpatialEstimator,
    sub: Subdivision,
    m_bar: usize,
    stiffness: &[SparseMatrix],
    k0: &SpdFactor,
) -> Result<SgfemEstimate> {
    let q = sol.set.neighborhood(m_bar);
    let m_max = sol.set.n_active() + m_bar;
    if m_max > problem.coeff.n_terms() {
        return Err(Error::InvalidArgument(format!("neighbourhood needs {m_max} coefficient terms, {} available", problem.coeff.n_terms())));
    }
    let extra;
    let all: &[SparseMatrix] = if stiffness.len() > m_max {
        stiffness
    } else {
        extra = [stiffness.to_vec(), assemble_stiffness_terms(problem, &sol.space, stiffness.len()..=m_max)?].concat();
        &extra
    };
    let (spatial, par) = rayon::join(|| estimate_spatial(problem, sol, strategy, sub), || estimate_parametric(problem, sol, &q, all, k0));
    let (spatial, par) = (spatial?, par?);
    let e_x = spatial.total;
    let e_p = par.iter().map(|v| v * v).sum::<f64>().sqrt();
    Ok(SgfemEstimate {
        spatial,
        parametric: q.into_iter().zip(par).collect(),
        e_x,
        e_p,
        eta: (e_x * e_x + e_p * e_p).sqrt(),
    })
}
