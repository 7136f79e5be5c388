use rayon::prelude::*;

use super::local::{dense_spd_solve, LocalSpace, Subdivision};
use super::{grad_at, hessian, is_dirichlet, local_values, mat_vec, Carrier, ErrorIndicators};
use crate::error::{Error, Result};
use crate::fem::{Coefficient, DeterministicProblem, FieldSolution, Order};
use crate::mesh::BoundaryMarker;

/// Local error space of the element residual estimator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Bubble {
    /// Midpoint hats of the element's sub-triangulation (P1 solutions).
    Linear,
    /// Quadratic edge bubbles (P1 solutions).
    Quadratic,
    /// Quartic edge and interior bubbles (P2 solutions).
    Quartic,
}

/// `∇·(A∇u)` for the local polynomial with values `u` on element geometry `g`.
pub(crate) fn divergence_flux(coeff: &Coefficient, order: Order, g: &crate::fem::element::Geometry, l: &[f64; 3], u: &[f64; 6], h: &[[f64; 2]; 2]) -> f64 {
    let x = g.point(l);
    let m = coeff.tensor_at(x);
    let mut s = m[0][0] * h[0][0] + m[0][1] * h[0][1] + m[1][0] * h[1][0] + m[1][1] * h[1][1];
    if let Coefficient::Field { .. } = coeff {
        let d = coeff.divergence_at(x);
        let gu = grad_at(order, g, l, u);
        s += d[0] * gu[0] + d[1] * gu[1];
    }
    s
}

/// Element residual estimator: on each element solves
/// `B_K(e_K, v) = (f + ∇·(A∇u_h), v)_K - Σ_E (R_E, v)_E` over the bubble
/// space, with `R_E` half the flux jump on interior edges and the Neumann
/// defect on Neumann edges. The indicator is `B_K(e_K, e_K)^{1/2}`.
pub fn estimate_ees1(problem: &DeterministicProblem, sol: &FieldSolution, bubble: Bubble, sub: Subdivision) -> Result<ErrorIndicators> {
    let space = &sol.space;
    let order = space.order();
    let local = match (bubble, order) {
        (Bubble::Linear, Order::P1) => LocalSpace::fine_p1(sub),
        (Bubble::Quadratic, Order::P1) => LocalSpace::lagrange(2),
        (Bubble::Quartic, Order::P2) => LocalSpace::lagrange(4),
        _ => return Err(Error::InvalidArgument(format!("{bubble:?} bubbles do not match {order:?} elements"))),
    };
    let mesh = space.mesh();
    let edges = space.edges();
    let coeff = &problem.diffusion;
    let values = (0..mesh.n_triangles())
        .into_par_iter()
        .map(|t| {
            let g = space.geometry(t);
            let tri = mesh.triangles()[t];
            let u = local_values(sol, t);
            let h = hessian(order, &g, &u);
            let mut rhs = local.load(&g, &|q, x| (problem.source)(x) + divergence_flux(coeff, order, &g, &q.l, &u, &h))?;
            let mut active = Vec::with_capacity(local.bubbles.len());
            let mut dirichlet = [false; 3];
            for i in 0..3 {
                let (a, b) = (tri[(i + 1) % 3], tri[(i + 2) % 3]);
                dirichlet[i] = is_dirichlet(mesh, a, b);
                if dirichlet[i] {
                    continue;
                }
                let e = edges.edge_of_triangle(t, i);
                let n = g.normal(i);
                match edges.neighbour(e, t) {
                    Some(t2) => {
                        let g2 = space.geometry(t2);
                        let u2 = local_values(sol, t2);
                        local.add_edge_load(
                            &g,
                            i,
                            &|q, x| {
                                let m = coeff.tensor_at(x);
                                let d1 = mat_vec(&m, grad_at(order, &g, &q.l, &u));
                                let d2 = mat_vec(&m, grad_at(order, &g2, &g2.barycentric(x), &u2));
                                -0.5 * ((d1[0] - d2[0]) * n[0] + (d1[1] - d2[1]) * n[1])
                            },
                            &mut rhs,
                        );
                    }
                    None => {
                        if mesh.boundary_marker(a, b) == Some(BoundaryMarker::Neumann) {
                            let gn = problem.neumann.as_ref();
                            local.add_edge_load(
                                &g,
                                i,
                                &|q, x| {
                                    let d = mat_vec(&coeff.tensor_at(x), grad_at(order, &g, &q.l, &u));
                                    gn.map_or(0.0, |f| f(x)) - (d[0] * n[0] + d[1] * n[1])
                                },
                                &mut rhs,
                            );
                        }
                    }
                }
            }
            for &k in &local.bubbles {
                if local.edge_of[k].map_or(true, |i| !dirichlet[i]) {
                    active.push(k);
                }
            }
            let k = local.stiffness(&g, coeff);
            Ok(solve_local(local.n, &k, &rhs, &active).ok_or(Error::SingularLocalSystem(t))?)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(ErrorIndicators::from_values(Carrier::Elements, values))
}

/// Solves the local system restricted to `active` and returns the energy
/// norm of the solution.
pub(crate) fn solve_local(n: usize, k: &[f64], rhs: &[f64], active: &[usize]) -> Option<f64> {
    let m = active.len();
    if m == 0 {
        return Some(0.0);
    }
    let mut a = vec![0.0; m * m];
    let mut b = vec![0.0; m];
    for (r, &i) in active.iter().enumerate() {
        b[r] = rhs[i];
        for (c, &j) in active.iter().enumerate() {
            a[r * m + c] = k[i * n + j];
        }
    }
    let r = b.clone();
    if !dense_spd_solve(&mut a, &mut b, m) {
        return None;
    }
    let e: f64 = b.iter().zip(&r).map(|(x, y)| x * y).sum();
    Some(e.max(0.0).sqrt())
}
