//! Property suites shared by the `properties` and `acceptance` targets. Each
//! suite runs a deterministic proptest runner and reports the first failure.
#![allow(dead_code)]

use std::sync::Arc;

use proptest::collection::vec;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};

use tifiss_core::adapt::mark_doerfler;
use tifiss_core::fem::{solve_deterministic, Coefficient, DeterministicProblem, FeSpace, Order};
use tifiss_core::goal::GoalFunctional;
use tifiss_core::quadrature::gauss_legendre;
use tifiss_core::sgfem::{MeasureFamily, MultiIndex, MultiIndexSet};
use tifiss_core::sparse::{minres, KroneckerSumOperator, MeanPreconditioner, SparseMatrix};
use tifiss_core::{generate_structured, refine_leb, DomainKind, EdgeTable, Mesh};

pub fn run<S: Strategy>(cases: u32, strategy: S, test: impl Fn(S::Value) -> Result<(), TestCaseError>) -> Result<(), String> {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, test).map_err(|e| e.to_string())
}

pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * b[j]).sum();
        b[i] = (b[i] - s) / a[i][i];
    }
    b
}

fn square(raw: &[f64], n: usize) -> Vec<Vec<f64>> {
    (0..n).map(|i| raw[i * n..(i + 1) * n].to_vec()).collect()
}

fn symmetric(a: &[Vec<f64>], scale: f64) -> Vec<Vec<f64>> {
    let n = a.len();
    (0..n).map(|i| (0..n).map(|j| 0.5 * scale * (a[i][j] + a[j][i])).collect()).collect()
}

/// `I ⊗ K_0 + Σ_m G_m ⊗ K_m` with `K_0 ≥ N_X I` and the remaining terms
/// bounded by `N_X / 2`, so the sum is positive definite.
#[derive(Debug, Clone)]
pub struct KronCase {
    pub g: Vec<Vec<Vec<f64>>>,
    pub k: Vec<Vec<Vec<f64>>>,
    pub x: Vec<f64>,
}

pub fn kron_case() -> impl Strategy<Value = KronCase> {
    (1usize..=8, 1usize..=5, 1usize..=4)
        .prop_flat_map(|(nx, np, nt)| (Just((nx, np, nt)), vec(-1.0..1.0f64, nt * nx * nx), vec(-1.0..1.0f64, nt * np * np), vec(-1.0..1.0f64, nx * np)))
        .prop_map(|((nx, np, nt), kr, gr, x)| {
            let mut k = Vec::new();
            let mut g = Vec::new();
            for m in 0..nt {
                let b = square(&kr[m * nx * nx..(m + 1) * nx * nx], nx);
                if m == 0 {
                    let k0 = (0..nx)
                        .map(|i| (0..nx).map(|j| (0..nx).map(|l| b[i][l] * b[j][l]).sum::<f64>() + if i == j { nx as f64 } else { 0.0 }).collect())
                        .collect();
                    k.push(k0);
                    g.push((0..np).map(|i| (0..np).map(|j| if i == j { 1.0 } else { 0.0 }).collect()).collect());
                } else {
                    k.push(symmetric(&b, 1.0));
                    g.push(symmetric(&square(&gr[m * np * np..(m + 1) * np * np], np), 0.5 / (np * nt) as f64));
                }
            }
            KronCase { g, k, x }
        })
}

fn kron_dense(c: &KronCase) -> Vec<Vec<f64>> {
    let (nx, np) = (c.k[0].len(), c.g[0].len());
    let mut a = vec![vec![0.0; nx * np]; nx * np];
    for (g, k) in c.g.iter().zip(&c.k) {
        for t in 0..np {
            for j in 0..np {
                for r in 0..nx {
                    for s in 0..nx {
                        a[t * nx + r][j * nx + s] += g[t][j] * k[r][s];
                    }
                }
            }
        }
    }
    a
}

pub fn check_kron(c: KronCase) -> Result<(), TestCaseError> {
    let terms = c.g.iter().zip(&c.k).map(|(g, k)| (SparseMatrix::from_dense(g), SparseMatrix::from_dense(k))).collect();
    let op = KroneckerSumOperator::new(terms).unwrap();
    let dense = kron_dense(&c);
    let y = op.kron_matvec(&c.x).unwrap();
    for (i, row) in dense.iter().enumerate() {
        let want: f64 = row.iter().zip(&c.x).map(|(a, b)| a * b).sum();
        prop_assert!((y[i] - want).abs() <= 1e-10, "matvec row {i}: {} vs {want}", y[i]);
    }
    let pre = MeanPreconditioner::new(&SparseMatrix::from_dense(&c.k[0]), c.g[0].len()).unwrap();
    let res = minres(&op, &c.x, &pre, 1e-15, 1000).unwrap();
    let want = gauss_solve(dense, c.x.clone());
    let scale = want.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    for (a, b) in res.x.iter().zip(&want) {
        prop_assert!((a - b).abs() <= 1e-10 * scale, "solve: {a} vs {b}");
    }
    Ok(())
}

pub fn measure() -> impl Strategy<Value = MeasureFamily> {
    prop_oneof![Just(MeasureFamily::Uniform), (0.5..5.0f64).prop_map(|sigma0| MeasureFamily::TruncatedGaussian { sigma0 })]
}

/// Five distinct indices, one of them zero, with up to three parameters.
pub fn index_set() -> impl Strategy<Value = MultiIndexSet> {
    proptest::sample::subsequence((1..64u32).collect::<Vec<_>>(), 4).prop_map(|codes| {
        let mut idx = vec![MultiIndex::zero()];
        idx.extend(codes.iter().map(|c| MultiIndex::from_dense(&[c % 4, (c / 4) % 4, c / 16])));
        MultiIndexSet::new(idx).unwrap()
    })
}

/// `G_m` against products of one-dimensional Gauss quadratures of
/// `∫ y_m P_ν P_μ dπ`.
pub fn check_g_matrices((measure, set): (MeasureFamily, MultiIndexSet)) -> Result<(), TestCaseError> {
    let rec = measure.recurrence(8).unwrap();
    let (y, w) = gauss_legendre(64);
    let deg = 4;
    let mut mass = vec![vec![0.0; deg]; deg];
    let mut first = vec![vec![0.0; deg]; deg];
    for (yi, wi) in y.iter().zip(&w) {
        let p = rec.eval(deg - 1, *yi);
        let d = wi * measure.density(*yi);
        for a in 0..deg {
            for b in 0..deg {
                mass[a][b] += d * p[a] * p[b];
                first[a][b] += d * yi * p[a] * p[b];
            }
        }
    }
    for m in 0..=3 {
        let g = rec.build_g(&set, m).to_dense();
        for (t, nu) in set.indices().iter().enumerate() {
            for (j, mu) in set.indices().iter().enumerate() {
                let q: f64 = (1..=3)
                    .map(|k| {
                        let (a, b) = (nu.get(k) as usize, mu.get(k) as usize);
                        if k == m {
                            first[a][b]
                        } else {
                            mass[a][b]
                        }
                    })
                    .product();
                prop_assert!((g[t][j] - q).abs() <= 1e-12, "G_{m}[{nu}][{mu}] = {} vs {q}", g[t][j]);
            }
        }
    }
    Ok(())
}

pub fn doerfler_case() -> impl Strategy<Value = (Vec<f64>, f64)> {
    (vec(prop_oneof![Just(0.0), 0.0..10.0f64, Just(1.0)], 1..200), 0.01..=1.0f64)
}

/// The marked set reaches the bulk and no smaller set can.
pub fn check_doerfler((values, theta): (Vec<f64>, f64)) -> Result<(), TestCaseError> {
    let marked = mark_doerfler(&values, theta).unwrap();
    let total: f64 = values.iter().map(|v| v * v).sum();
    let got: f64 = marked.iter().map(|&i| values[i] * values[i]).sum();
    if total == 0.0 {
        prop_assert!(marked.is_empty());
        return Ok(());
    }
    prop_assert!(got >= theta * total * (1.0 - 1e-12), "bulk {got} < {theta} * {total}");
    let mut sorted: Vec<f64> = values.iter().map(|v| v * v).collect();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let best_smaller: f64 = sorted[..marked.len() - 1].iter().sum();
    prop_assert!(best_smaller < theta * total, "{} indicators would suffice", marked.len() - 1);
    prop_assert!(marked.windows(2).all(|w| w[0] < w[1]));
    Ok(())
}

pub fn domain() -> impl Strategy<Value = DomainKind> {
    prop_oneof![Just(DomainKind::Square), Just(DomainKind::LShaped), Just(DomainKind::Slit(0.005))]
}

fn bary(p: [f64; 2], t: &[[f64; 2]; 3]) -> [f64; 3] {
    let d = (t[1][0] - t[0][0]) * (t[2][1] - t[0][1]) - (t[1][1] - t[0][1]) * (t[2][0] - t[0][0]);
    let l1 = ((p[0] - t[0][0]) * (t[2][1] - t[0][1]) - (p[1] - t[0][1]) * (t[2][0] - t[0][0])) / d;
    let l2 = ((t[1][0] - t[0][0]) * (p[1] - t[0][1]) - (t[1][1] - t[0][1]) * (p[0] - t[0][0])) / d;
    [1.0 - l1 - l2, l1, l2]
}

/// Ten rounds of refinement with edges marked from the drawn seeds; after
/// every round the mesh is conforming and each child lies in its parent.
pub fn check_refinement((domain, level, seeds): (DomainKind, u32, Vec<u64>)) -> Result<(), TestCaseError> {
    let mut mesh: Mesh = generate_structured(domain, level).unwrap();
    for seed in seeds {
        let n_edges = EdgeTable::new(&mesh).len();
        let marked: Vec<usize> = (0..n_edges).filter(|&e| (seed.wrapping_mul(e as u64 + 1) >> 29) % 7 == 0).collect();
        let (next, parent) = refine_leb(&mesh, &marked).unwrap();
        prop_assert!(next.validate().is_ok(), "{:?}", next.validate());
        prop_assert_eq!(parent.len(), next.n_triangles());
        prop_assert_eq!(&next.vertices()[..mesh.n_vertices()], mesh.vertices());
        let mut area = vec![0.0; mesh.n_triangles()];
        for (t, &p) in parent.iter().enumerate() {
            area[p] += next.area(t);
            let outer = mesh.coords(p);
            for v in next.coords(t) {
                prop_assert!(bary(v, &outer).iter().all(|&l| l >= -1e-12), "child {t} leaves parent {p}");
            }
        }
        for (p, a) in area.iter().enumerate() {
            prop_assert!((a - mesh.area(p)).abs() <= 1e-12 * mesh.area(p).max(1e-300));
        }
        if !marked.is_empty() {
            prop_assert!(next.n_triangles() > mesh.n_triangles());
        }
        mesh = next;
    }
    Ok(())
}

pub fn mollifier_case() -> impl Strategy<Value = (f64, f64, f64, u32)> {
    (0.05..0.4f64, 0.0..1.0f64, 0.0..1.0f64, 1u32..=3)
}

pub fn check_mollifier((r, s, t, level): (f64, f64, f64, u32)) -> Result<(), TestCaseError> {
    let x0 = [-1.0 + r + s * (2.0 - 2.0 * r), -1.0 + r + t * (2.0 - 2.0 * r)];
    let g = GoalFunctional::new(x0, r * (1.0 - 1e-9), DomainKind::Square).unwrap();
    let space = FeSpace::new(Arc::new(generate_structured(DomainKind::Square, level).unwrap()), Order::P1);
    let total: f64 = g.goal_vector(&space).iter().sum();
    prop_assert!((total - 1.0).abs() <= 1e-8, "x0 = {x0:?}, r = {r}: {total}");
    Ok(())
}

pub fn patch_case() -> impl Strategy<Value = (DomainKind, u32, bool, [f64; 3], [f64; 3], u64)> {
    (domain(), 0u32..=2, any::<bool>(), [0.5..5.0f64, 0.5..5.0, -0.9..0.9], [-2.0..2.0f64, -2.0..2.0, -2.0..2.0], any::<u64>())
}

/// Affine data with a constant tensor is reproduced exactly by P1 and P2.
pub fn check_patch((domain, level, p2, a, c, seed): (DomainKind, u32, bool, [f64; 3], [f64; 3], u64)) -> Result<(), TestCaseError> {
    let off = a[2] * (a[0] * a[1]).sqrt();
    let problem = DeterministicProblem::new(domain, Coefficient::Tensor([[a[0], off], [off, a[1]]]), Arc::new(|_| 0.0))
        .with_dirichlet(Arc::new(move |x| c[0] + c[1] * x[0] + c[2] * x[1]));
    let mut mesh = generate_structured(domain, level).unwrap();
    let n_edges = EdgeTable::new(&mesh).len();
    let marked: Vec<usize> = (0..n_edges).filter(|&e| (seed.wrapping_mul(e as u64 + 1) >> 31) % 3 == 0).collect();
    mesh = refine_leb(&mesh, &marked).unwrap().0;
    let order = if p2 { Order::P2 } else { Order::P1 };
    let sol = solve_deterministic(&problem, Arc::new(mesh), order).unwrap().solution;
    for (x, v) in sol.space.dof_coords().iter().zip(&sol.values) {
        let want = c[0] + c[1] * x[0] + c[2] * x[1];
        prop_assert!((v - want).abs() <= 1e-12, "at {x:?}: {v} vs {want}");
    }
    Ok(())
}

pub const KRON_CASES: u32 = 256;
pub const G_CASES: u32 = 256;
pub const DOERFLER_CASES: u32 = 1000;
pub const REFINE_CASES: u32 = 48;
pub const MOLLIFIER_CASES: u32 = 48;
pub const PATCH_CASES: u32 = 64;

pub fn kron_suite() -> Result<(), String> {
    run(KRON_CASES, kron_case(), check_kron)
}

pub fn g_suite() -> Result<(), String> {
    run(G_CASES, (measure(), index_set()), check_g_matrices)
}

pub fn doerfler_suite() -> Result<(), String> {
    run(DOERFLER_CASES, doerfler_case(), check_doerfler)
}

pub fn refinement_suite() -> Result<(), String> {
    run(REFINE_CASES, (domain(), 0u32..=1, vec(any::<u64>(), 10)), check_refinement)
}

pub fn mollifier_suite() -> Result<(), String> {
    run(MOLLIFIER_CASES, mollifier_case(), check_mollifier)
}

pub fn patch_suite() -> Result<(), String> {
    run(PATCH_CASES, patch_case(), check_patch)
}

/// Every suite of the oracle-equivalence battery, by name.
pub fn all_suites() -> Vec<(&'static str, fn() -> Result<(), String>)> {
    vec![
        ("kronecker matvec and solve vs dense", kron_suite as fn() -> Result<(), String>),
        ("G matrices vs tensor quadrature", g_suite),
        ("Dörfler minimality", doerfler_suite),
        ("refinement conformity and nestedness", refinement_suite),
        ("mollifier unit mass", mollifier_suite),
        ("patch test", patch_suite),
    ]
}
