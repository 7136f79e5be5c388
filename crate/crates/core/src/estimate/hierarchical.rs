use rayon::prelude::*;

use super::local::{LocalSpace, Subdivision};
use super::{is_dirichlet, local_values, Carrier, ErrorIndicators};
use crate::error::{Error, Result};
use crate::fem::{DeterministicProblem, FieldSolution, Order};
use crate::mesh::BoundaryMarker;
use crate::sparse::{SpdFactor, TripletBuilder};

/// Per-element residuals against the three midpoint hats and the 3×3
/// midpoint block of the sub-triangulated stiffness matrix.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Detail {
    pub r: [f64; 3],
    pub a: [f64; 9],
}

/// Values of a P1 function at the six nodes of the sub-triangulation.
pub(crate) fn fine_values(u: &[f64; 6]) -> [f64; 6] {
    [u[0], u[1], u[2], 0.5 * (u[1] + u[2]), 0.5 * (u[2] + u[0]), 0.5 * (u[0] + u[1])]
}

fn element_details(problem: &DeterministicProblem, sol: &FieldSolution, sub: Subdivision) -> Result<Vec<Detail>> {
    let space = &sol.space;
    if space.order() != Order::P1 {
        return Err(Error::InvalidArgument("two-level and hierarchical estimators need P1 elements".into()));
    }
    let mesh = space.mesh();
    let local = LocalSpace::fine_p1(sub);
    (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let g = space.geometry(t);
            let k = local.stiffness(&g, &problem.diffusion);
            let mut b = local.load(&g, &|_, x| (problem.source)(x))?;
            if let Some(gn) = &problem.neumann {
                let tri = mesh.triangles()[t];
                for i in 0..3 {
                    if mesh.boundary_marker(tri[(i + 1) % 3], tri[(i + 2) % 3]) == Some(BoundaryMarker::Neumann) {
                        local.add_edge_load(&g, i, &|_, x| gn(x), &mut b);
                    }
                }
            }
            let uf = fine_values(&local_values(sol, t));
            let mut d = Detail { r: [0.0; 3], a: [0.0; 9] };
            for m in 0..3 {
                let row = &k[(3 + m) * 6..(4 + m) * 6];
                d.r[m] = b[3 + m] - row.iter().zip(&uf).map(|(x, y)| x * y).sum::<f64>();
                for c in 0..3 {
                    d.a[m * 3 + c] = row[3 + c];
                }
            }
            Ok(d)
        })
        .collect()
}

fn dirichlet_edges(sol: &FieldSolution) -> Vec<bool> {
    let mesh = sol.space.mesh();
    sol.space.edges().edges().iter().map(|&[a, b]| is_dirichlet(mesh, a, b)).collect()
}

/// Two-level estimator: `η_E = |R(φ_E)| / B(φ_E, φ_E)^{1/2}` for every
/// non-Dirichlet edge, with `φ_E` the hat of the edge midpoint on the
/// uniformly refined mesh. Element indicators collect the squares of their
/// own edges. The total is `(Σ_E η_E²)^{1/2}` in both cases.
pub fn estimate_ees3(problem: &DeterministicProblem, sol: &FieldSolution, carrier: Carrier, sub: Subdivision) -> Result<ErrorIndicators> {
    let details = element_details(problem, sol, sub)?;
    let edges = sol.space.edges();
    let dir = dirichlet_edges(sol);
    let mut r = vec![0.0; edges.len()];
    let mut d = vec![0.0; edges.len()];
    for (t, det) in details.iter().enumerate() {
        for (m, e) in edges.triangle_edges(t).into_iter().enumerate() {
            r[e] += det.r[m];
            d[e] += det.a[m * 3 + m];
        }
    }
    let eta: Vec<f64> = (0..edges.len()).map(|e| if dir[e] { 0.0 } else { r[e].abs() / d[e].sqrt() }).collect();
    let total = eta.iter().map(|v| v * v).sum::<f64>().sqrt();
    let values = match carrier {
        Carrier::Edges => eta,
        Carrier::Elements => (0..details.len())
            .map(|t| edges.triangle_edges(t).iter().map(|&e| eta[e] * eta[e]).sum::<f64>().sqrt())
            .collect(),
    };
    Ok(ErrorIndicators { carrier, values, total })
}

/// Global hierarchical estimator: solves for `e` in the span of the
/// non-Dirichlet midpoint hats with `B(e, v) = R(v)`. The total is
/// `B(e, e)^{1/2}`; element indicators are `B_K(e, e)^{1/2}` and edge
/// indicators are `|e_E| B(φ_E, φ_E)^{1/2}`.
pub fn estimate_ees2(problem: &DeterministicProblem, sol: &FieldSolution, carrier: Carrier, sub: Subdivision) -> Result<ErrorIndicators> {
    let details = element_details(problem, sol, sub)?;
    let edges = sol.space.edges();
    let dir = dirichlet_edges(sol);
    let mut pos = vec![usize::MAX; edges.len()];
    let mut n = 0;
    for e in 0..edges.len() {
        if !dir[e] {
            pos[e] = n;
            n += 1;
        }
    }
    let mut tb = TripletBuilder::with_capacity(9 * details.len());
    let mut rhs = vec![0.0; n];
    for (t, det) in details.iter().enumerate() {
        let te = edges.triangle_edges(t);
        for m in 0..3 {
            let i = pos[te[m]];
            if i == usize::MAX {
                continue;
            }
            rhs[i] += det.r[m];
            for c in 0..3 {
                let j = pos[te[c]];
                if j != usize::MAX {
                    tb.push(i, j, det.a[m * 3 + c]);
                }
            }
        }
    }
    let a = tb.build(n, n);
    let e = if n == 0 { Vec::new() } else { SpdFactor::new(&a)?.solve(&rhs) };
    let total = e.iter().zip(&rhs).map(|(x, y)| x * y).sum::<f64>().max(0.0).sqrt();
    let coef = |edge: usize| if pos[edge] == usize::MAX { 0.0 } else { e[pos[edge]] };
    let values = match carrier {
        Carrier::Elements => details
            .iter()
            .enumerate()
            .map(|(t, det)| {
                let c = edges.triangle_edges(t).map(coef);
                let mut s = 0.0;
                for i in 0..3 {
                    for j in 0..3 {
                        s += c[i] * det.a[i * 3 + j] * c[j];
                    }
                }
                s.max(0.0).sqrt()
            })
            .collect(),
        Carrier::Edges => {
            let diag = a.diagonal();
            (0..edges.len()).map(|k| if pos[k] == usize::MAX { 0.0 } else { e[pos[k]].abs() * diag[pos[k]].sqrt() }).collect()
        }
    };
    Ok(ErrorIndicators { carrier, values, total })
}
