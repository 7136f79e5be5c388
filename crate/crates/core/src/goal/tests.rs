use super::*;
use crate::fem::Coefficient;
use crate::mesh::generate_structured;

fn slit_goal(r: f64) -> GoalFunctional {
    GoalFunctional::new([0.4, -0.5], r, DomainKind::Slit(0.005)).unwrap()
}

#[test]
fn normalisation_constant() {
    // C r² ≈ 1 / (π · 0.148496...)
    for r in [0.2, 0.35] {
        let g = GoalFunctional::new([0.0, 0.0], r, DomainKind::Square).unwrap();
        let expected = 2.1436 / (r * r);
        assert!((g.c - expected).abs() < 5e-3 * expected, "{} vs {}", g.c, expected);
    }
    assert!(GoalFunctional::new([0.9, 0.9], 0.2, DomainKind::Square).is_err());
    assert!(GoalFunctional::new([0.0, 0.0], 0.0, DomainKind::Square).is_err());
}

#[test]
fn mollifier_values() {
    let g = slit_goal(0.2);
    assert!((g.value(g.x0) - g.c / std::f64::consts::E).abs() < 1e-12);
    assert_eq!(g.value([0.4, -0.3]), 0.0);
    assert_eq!(g.value([0.0, 0.0]), 0.0);
}

#[test]
fn unit_mass() {
    let g = slit_goal(0.2);
    let mesh = Arc::new(generate_structured(DomainKind::Slit(0.005), 2).unwrap());
    let space = FeSpace::new(mesh, Order::P1);
    let total: f64 = g.goal_vector(&space).iter().sum();
    assert!((total - 1.0).abs() < 1e-8, "{total}");
}

#[test]
fn goal_vector_matches_fine_quadrature() {
    // independent oracle: midpoint sums over a fine uniform grid of each element
    let g = slit_goal(0.2);
    let mesh = Arc::new(generate_structured(DomainKind::Slit(0.005), 1).unwrap());
    let space = FeSpace::new(mesh.clone(), Order::P1);
    let v = space.interpolate(&|x| 1.0 + x[0] - 2.0 * x[1]);
    let got: f64 = g.goal_vector(&space).iter().zip(&v).map(|(a, b)| a * b).sum();
    let n = 400;
    let mut want = 0.0;
    for t in 0..mesh.n_triangles() {
        let geo = Geometry::new(mesh.coords(t));
        for i in 0..n {
            for j in 0..n - i {
                // upward cells of the n×n sub-grid, centroids only
                let l = [(i as f64 + 1.0 / 3.0) / n as f64, (j as f64 + 1.0 / 3.0) / n as f64, 0.0];
                let l = [l[0], l[1], 1.0 - l[0] - l[1]];
                let x = geo.point(&l);
                want += g.value(x) * (1.0 + x[0] - 2.0 * x[1]) * geo.area / (n * n) as f64;
                if j + 1 < n - i {
                    let l = [(i as f64 + 2.0 / 3.0) / n as f64, (j as f64 + 2.0 / 3.0) / n as f64, 0.0];
                    let l = [l[0], l[1], 1.0 - l[0] - l[1]];
                    let x = geo.point(&l);
                    want += g.value(x) * (1.0 + x[0] - 2.0 * x[1]) * geo.area / (n * n) as f64;
                }
            }
        }
    }
    assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    // G(1 + x - 2y) = 1 + x₀ - 2y₀ by symmetry of the bump
    assert!((got - (1.0 + 0.4 + 1.0)).abs() < 1e-8, "{got}");
}

#[test]
fn goal_vector_vanishes_away_from_disk() {
    let g = slit_goal(0.2);
    let mesh = Arc::new(generate_structured(DomainKind::Slit(0.005), 3).unwrap());
    let space = FeSpace::new(mesh, Order::P1);
    let gv = g.goal_vector(&space);
    for (i, x) in space.dof_coords().iter().enumerate() {
        let d = ((x[0] - 0.4).powi(2) + (x[1] + 0.5).powi(2)).sqrt();
        if d > 0.2 + 0.5 {
            assert_eq!(gv[i], 0.0);
        }
    }
}

#[test]
fn dual_with_primal_load_reproduces_primal() {
    let pb = DeterministicProblem::new(DomainKind::Square, Coefficient::Constant(1.0), Arc::new(|x| 1.0 + x[0]));
    let mesh = Arc::new(generate_structured(DomainKind::Square, 2).unwrap());
    let out = solve_deterministic(&pb, mesh, Order::P1).unwrap();
    let load = crate::fem::assemble_load(&out.solution.space, &|x| 1.0 + x[0]).unwrap();
    let z = solve_dual(&out.system, &load);
    for (a, b) in z.values.iter().zip(&out.solution.values) {
        assert!((a - b).abs() < 1e-13);
    }
}

fn slit_problem() -> DeterministicProblem {
    DeterministicProblem::new(DomainKind::Slit(0.005), Coefficient::Constant(1.0), Arc::new(|_| 1.0))
}

#[test]
fn loose_tolerance_needs_no_refinement() {
    let mesh = Arc::new(generate_structured(DomainKind::Slit(0.005), 1).unwrap());
    let cfg = GoafemConfig {
        tol: 1e3,
        reference: false,
        ..Default::default()
    };
    let out = goafem_solve(&slit_problem(), &slit_goal(0.2), mesh.clone(), &cfg).unwrap();
    assert_eq!(out.report.records.len(), 1);
    assert_eq!(out.mesh().n_triangles(), mesh.n_triangles());
    assert_eq!(out.report.status, Termination::Converged);
}

#[test]
fn goal_error_bounded_by_estimate() {
    let mesh = Arc::new(generate_structured(DomainKind::Slit(0.005), 1).unwrap());
    let cfg = GoafemConfig {
        tol: 2e-3,
        ..Default::default()
    };
    let out = goafem_solve(&slit_problem(), &slit_goal(0.2), mesh, &cfg).unwrap();
    let r = &out.report.records;
    assert!(r.len() > 2);
    assert!(r.windows(2).all(|w| w[1].dofs > w[0].dofs));
    for rec in r {
        assert!(rec.ref_goal_error.unwrap() <= 5.0 * rec.mu_zeta());
    }
    let mut buf = Vec::new();
    out.report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("iter,dofs,mu,zeta,mu_zeta,goal_value,ref_goal_error\n"));
}

#[test]
fn rejects_element_carrier() {
    let mesh = Arc::new(generate_structured(DomainKind::Square, 1).unwrap());
    let mut cfg = GoafemConfig::default();
    cfg.estimator.carrier = Carrier::Elements;
    let g = GoalFunctional::new([0.0, 0.0], 0.2, DomainKind::Square).unwrap();
    let pb = DeterministicProblem::new(DomainKind::Square, Coefficient::Constant(1.0), Arc::new(|_| 1.0));
    assert!(goafem_solve(&pb, &g, mesh, &cfg).is_err());
}
