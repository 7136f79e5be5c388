//! JSON run configuration.
//!
//! A preset fixes the problem data (domain, coefficients, source, boundary
//! data, goal functional) and supplies default solver settings; any solver
//! key given in the file replaces the preset default. Problem-data keys are
//! only read for `"preset": "custom"`.

use std::sync::Arc;

use serde::Deserialize;

use tifiss_core::adapt::{AdaptiveConfig, ElementRefinement, MarkingConfig, MarkingStrategy};
use tifiss_core::estimate::{Bubble, Carrier, EstimatorConfig, Strategy, Subdivision};
use tifiss_core::fem::{Coefficient, DeterministicProblem, Order};
use tifiss_core::goal::{GoMark, GoafemConfig, GoalFunctional};
use tifiss_core::presets;
use tifiss_core::sgfem::{
    ExpansionKind, MeasureFamily, MultiIndex, MultiIndexSet, ParametricCoefficient, SgfemConfig, SgfemProblem, SgfemVersion, SpatialEstimator,
};
use tifiss_core::{generate_structured, DomainKind, Mesh};

pub const SCHEMA_VERSION: u32 = 1;

/// A configuration problem, tied to the key that caused it.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config key `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn bad(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError {
        key: key.to_string(),
        message: message.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Deterministic,
    Goafem,
    Sgfem,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Preset {
    Example1,
    Example2,
    Example3,
    Example4,
    #[default]
    Custom,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorName {
    /// Bubble space chosen by the element order.
    Ees1,
    Ees1Linear,
    Ees1Quadratic,
    Ees1Quartic,
    Ees2,
    Ees3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CarrierName {
    Elements,
    Edges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MarkingName {
    Doerfler,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RefinementName {
    ReferenceEdge,
    AllEdges,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SubdivisionName {
    Bisec3,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum OrderName {
    P1,
    P2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GoMarkName {
    Go1,
    Go2,
    Go3,
    Go4,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DomainSpec {
    Square,
    Lshaped,
    Slit(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DiffusionSpec {
    Scalar(f64),
    Tensor([[f64; 2]; 2]),
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase", deny_unknown_fields)]
pub enum ExpansionSpec {
    Ce1 { sigma: f64, l1: f64, l2: f64, mean: f64 },
    Ce2 { decay: f64 },
    Ce3 { ell: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSpec {
    Uniform,
    TruncatedGaussian(f64),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    pub mode: Mode,
    #[serde(default)]
    pub preset: Preset,
    pub estimator: Option<EstimatorName>,
    pub carrier: Option<CarrierName>,
    pub marking: Option<MarkingName>,
    pub theta: Option<f64>,
    pub element_refinement: Option<RefinementName>,
    pub subdivision: Option<SubdivisionName>,
    pub order: Option<OrderName>,
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    /// Write measured wall-clock times into the history (zeros otherwise).
    pub timings: Option<bool>,
    pub level: Option<u32>,
    pub combinator: Option<GoMarkName>,
    pub radius: Option<f64>,
    pub point: Option<[f64; 2]>,
    pub reference: Option<bool>,
    pub theta_x: Option<f64>,
    pub theta_p: Option<f64>,
    pub m_bar: Option<usize>,
    pub version: Option<u8>,
    pub minres_tol: Option<f64>,
    pub minres_maxit: Option<usize>,
    pub initial_set: Option<Vec<Vec<u32>>>,
    pub domain: Option<DomainSpec>,
    pub diffusion: Option<DiffusionSpec>,
    pub source: Option<f64>,
    pub dirichlet: Option<f64>,
    pub expansion: Option<ExpansionSpec>,
    pub measure: Option<MeasureSpec>,
    pub n_terms: Option<usize>,
}

/// Parses a configuration, naming the offending key on failure.
pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let cfg: RunConfig = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        let key = if path == "." || path == "?" { "<document>".to_string() } else { path };
        bad(&key, e.into_inner().to_string())
    })?;
    if cfg.schema != SCHEMA_VERSION {
        return Err(bad("schema", format!("unsupported version {}, expected {SCHEMA_VERSION}", cfg.schema)));
    }
    Ok(cfg)
}

/// A fully resolved run.
pub enum Job {
    Deterministic {
        problem: DeterministicProblem,
        mesh: Arc<Mesh>,
        config: AdaptiveConfig,
        /// Point at which the final solution is reported.
        probe: Option<[f64; 2]>,
    },
    Goafem {
        problem: DeterministicProblem,
        goal: GoalFunctional,
        mesh: Arc<Mesh>,
        config: GoafemConfig,
    },
    Sgfem {
        problem: SgfemProblem,
        mesh: Arc<Mesh>,
        initial: MultiIndexSet,
        config: SgfemConfig,
    },
}

fn positive(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(key, format!("must be positive, got {v}")))
    }
}

fn fraction(key: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v <= 1.0 {
        Ok(v)
    } else {
        Err(bad(key, format!("must lie in (0, 1], got {v}")))
    }
}

fn core_err(key: &str) -> impl Fn(tifiss_core::Error) -> ConfigError + '_ {
    move |e| bad(key, e.to_string())
}

impl RunConfig {
    fn expected_mode(&self) -> Option<Mode> {
        match self.preset {
            Preset::Example1 | Preset::Example2 => Some(Mode::Deterministic),
            Preset::Example3 => Some(Mode::Goafem),
            Preset::Example4 => Some(Mode::Sgfem),
            Preset::Custom => None,
        }
    }

    fn domain(&self) -> Result<DomainKind, ConfigError> {
        Ok(match self.preset {
            Preset::Example1 => DomainKind::Square,
            Preset::Example2 | Preset::Example4 => DomainKind::LShaped,
            Preset::Example3 => DomainKind::Slit(presets::SLIT_HALF_WIDTH),
            Preset::Custom => match self.domain.ok_or_else(|| bad("domain", "required for custom problems"))? {
                DomainSpec::Square => DomainKind::Square,
                DomainSpec::Lshaped => DomainKind::LShaped,
                DomainSpec::Slit(d) => {
                    if !(d > 0.0 && d < 1.0) {
                        return Err(bad("domain", format!("slit half-width must lie in (0, 1), got {d}")));
                    }
                    DomainKind::Slit(d)
                }
            },
        })
    }

    fn mesh(&self, domain: DomainKind) -> Result<Arc<Mesh>, ConfigError> {
        let level = self.level.unwrap_or(2);
        if level > 8 {
            return Err(bad("level", format!("at most 8, got {level}")));
        }
        Ok(Arc::new(generate_structured(domain, level).map_err(core_err("level"))?))
    }

    fn custom_problem(&self, domain: DomainKind) -> Result<DeterministicProblem, ConfigError> {
        let diffusion = match self.diffusion.unwrap_or(DiffusionSpec::Scalar(1.0)) {
            DiffusionSpec::Scalar(a) => Coefficient::Constant(positive("diffusion", a)?),
            DiffusionSpec::Tensor(a) => {
                if a[0][1] != a[1][0] || !(a[0][0] > 0.0 && a[0][0] * a[1][1] - a[0][1] * a[1][0] > 0.0) {
                    return Err(bad("diffusion", "tensor must be symmetric positive definite"));
                }
                Coefficient::Tensor(a)
            }
        };
        let f = self.source.unwrap_or(1.0);
        let g = self.dirichlet.unwrap_or(0.0);
        Ok(DeterministicProblem::new(domain, diffusion, Arc::new(move |_| f)).with_dirichlet(Arc::new(move |_| g)))
    }

    fn order(&self, default: Order) -> Order {
        match self.order {
            Some(OrderName::P1) => Order::P1,
            Some(OrderName::P2) => Order::P2,
            None => default,
        }
    }

    fn subdivision(&self) -> Subdivision {
        match self.subdivision {
            Some(SubdivisionName::Red) => Subdivision::Red,
            _ => Subdivision::Bisec3,
        }
    }

    fn estimator(&self, order: Order, default: (EstimatorName, CarrierName)) -> Result<EstimatorConfig, ConfigError> {
        let strategy = match self.estimator.unwrap_or(default.0) {
            EstimatorName::Ees1 => Strategy::Ees1(if order == Order::P2 { Bubble::Quartic } else { Bubble::Linear }),
            EstimatorName::Ees1Linear => Strategy::Ees1(Bubble::Linear),
            EstimatorName::Ees1Quadratic => Strategy::Ees1(Bubble::Quadratic),
            EstimatorName::Ees1Quartic => Strategy::Ees1(Bubble::Quartic),
            EstimatorName::Ees2 => Strategy::Ees2,
            EstimatorName::Ees3 => Strategy::Ees3,
        };
        match (strategy, order) {
            (Strategy::Ees1(Bubble::Quartic), Order::P1) => return Err(bad("estimator", "quartic bubbles need P2 elements")),
            (Strategy::Ees1(Bubble::Linear | Bubble::Quadratic), Order::P2) => return Err(bad("estimator", "P2 elements need quartic bubbles")),
            _ => {}
        }
        let carrier = match self.carrier.unwrap_or(default.1) {
            CarrierName::Elements => Carrier::Elements,
            CarrierName::Edges => Carrier::Edges,
        };
        if matches!(strategy, Strategy::Ees1(_)) && carrier == Carrier::Edges {
            return Err(bad("carrier", "EES1 indicators live on elements"));
        }
        Ok(EstimatorConfig {
            subdivision: self.subdivision(),
            ..EstimatorConfig::new(strategy, carrier)
        })
    }

    fn marking(&self, carrier: Carrier, theta: f64) -> Result<MarkingConfig, ConfigError> {
        Ok(MarkingConfig {
            strategy: match self.marking {
                Some(MarkingName::Maximum) => MarkingStrategy::Maximum,
                _ => MarkingStrategy::Doerfler,
            },
            theta: fraction("theta", self.theta.unwrap_or(theta))?,
            element_refinement: match self.element_refinement {
                Some(RefinementName::AllEdges) => ElementRefinement::AllEdges,
                _ => ElementRefinement::ReferenceEdge,
            },
            ..MarkingConfig::doerfler(theta, carrier)
        })
    }

    fn tol(&self, default: f64) -> Result<f64, ConfigError> {
        positive("tol", self.tol.unwrap_or(default))
    }

    fn goal_keys(&self) -> [(&'static str, bool); 3] {
        [("combinator", self.combinator.is_some()), ("radius", self.radius.is_some()), ("reference", self.reference.is_some())]
    }

    fn sgfem_keys(&self) -> [(&'static str, bool); 10] {
        [
            ("theta_x", self.theta_x.is_some()),
            ("theta_p", self.theta_p.is_some()),
            ("m_bar", self.m_bar.is_some()),
            ("version", self.version.is_some()),
            ("minres_tol", self.minres_tol.is_some()),
            ("minres_maxit", self.minres_maxit.is_some()),
            ("initial_set", self.initial_set.is_some()),
            ("expansion", self.expansion.is_some()),
            ("measure", self.measure.is_some()),
            ("n_terms", self.n_terms.is_some()),
        ]
    }

    fn reject_for_mode(&self, keys: &[(&str, bool)]) -> Result<(), ConfigError> {
        match keys.iter().find(|k| k.1) {
            Some((k, _)) => Err(bad(k, format!("not used in {:?} mode", self.mode).to_lowercase())),
            None => Ok(()),
        }
    }

    pub fn resolve(&self) -> Result<Job, ConfigError> {
        if let Some(m) = self.expected_mode() {
            if m != self.mode {
                return Err(bad("mode", format!("preset {:?} runs in {:?} mode", self.preset, m).to_lowercase()));
            }
        }
        let domain = self.domain()?;
        let mesh = self.mesh(domain)?;
        let max_iter = self.max_iter.unwrap_or(200);
        match self.mode {
            Mode::Deterministic => {
                self.reject_for_mode(&[&self.goal_keys()[..], &self.sgfem_keys()].concat())?;
                let (problem, defaults, order, tol, probe) = match self.preset {
                    Preset::Example1 => (presets::example1(), (EstimatorName::Ees2, CarrierName::Elements), Order::P1, 1e-3, None),
                    Preset::Example2 => (presets::example2(), (EstimatorName::Ees1Quartic, CarrierName::Elements), Order::P2, 4e-5, Some(presets::EXAMPLE2_POINT)),
                    _ => (self.custom_problem(domain)?, (EstimatorName::Ees3, CarrierName::Edges), Order::P1, 1e-2, self.point),
                };
                let order = self.order(order);
                let estimator = self.estimator(order, defaults)?;
                let marking = self.marking(estimator.carrier, 0.5)?;
                Ok(Job::Deterministic {
                    problem,
                    mesh,
                    config: AdaptiveConfig {
                        order,
                        estimator,
                        marking,
                        tol: self.tol(tol)?,
                        max_iter,
                    },
                    probe,
                })
            }
            Mode::Goafem => {
                let unused = [
                    ("order", self.order == Some(OrderName::P2)),
                    ("marking", self.marking.is_some()),
                    ("element_refinement", self.element_refinement.is_some()),
                    ("timings", self.timings.is_some()),
                ];
                self.reject_for_mode(&[&unused[..], &self.sgfem_keys()].concat())?;
                let r = positive("radius", self.radius.unwrap_or(0.2))?;
                let (problem, goal) = match self.preset {
                    Preset::Example3 => presets::example3(r).map_err(core_err("radius"))?,
                    _ => {
                        let x0 = self.point.ok_or_else(|| bad("point", "required for custom goal-oriented problems"))?;
                        (self.custom_problem(domain)?, GoalFunctional::new(x0, r, domain).map_err(core_err("point"))?)
                    }
                };
                let estimator = self.estimator(Order::P1, (EstimatorName::Ees3, CarrierName::Edges))?;
                if estimator.carrier != Carrier::Edges {
                    return Err(bad("carrier", "goal-oriented marking works on edges"));
                }
                let combinator = match self.combinator.unwrap_or(GoMarkName::Go4) {
                    GoMarkName::Go1 => GoMark::Go1,
                    GoMarkName::Go2 => GoMark::Go2,
                    GoMarkName::Go3 => GoMark::Go3,
                    GoMarkName::Go4 => GoMark::Go4,
                };
                Ok(Job::Goafem {
                    problem,
                    goal,
                    mesh,
                    config: GoafemConfig {
                        estimator,
                        theta: fraction("theta", self.theta.unwrap_or(0.3))?,
                        combinator,
                        tol: self.tol(if self.preset == Preset::Example3 { 8e-5 } else { 1e-3 })?,
                        max_iter,
                        reference: self.reference.unwrap_or(true),
                    },
                })
            }
            Mode::Sgfem => {
                self.reject_for_mode(
                    &[
                        &[
                            ("order", self.order == Some(OrderName::P2)),
                            ("theta", self.theta.is_some()),
                            ("carrier", self.carrier.is_some()),
                            ("marking", self.marking.is_some()),
                            ("element_refinement", self.element_refinement.is_some()),
                            ("point", self.point.is_some()),
                            ("timings", self.timings.is_some()),
                            ("diffusion", self.diffusion.is_some()),
                            ("dirichlet", self.dirichlet.is_some()),
                        ][..],
                        &self.goal_keys(),
                    ]
                    .concat(),
                )?;
                let problem = match self.preset {
                    Preset::Example4 => presets::example4().map_err(core_err("preset"))?,
                    _ => {
                        let measure = match self.measure.unwrap_or(MeasureSpec::Uniform) {
                            MeasureSpec::Uniform => MeasureFamily::Uniform,
                            MeasureSpec::TruncatedGaussian(s) => MeasureFamily::TruncatedGaussian { sigma0: positive("measure", s)? },
                        };
                        let kind = match self.expansion.ok_or_else(|| bad("expansion", "required for custom parametric problems"))? {
                            ExpansionSpec::Ce1 { sigma, l1, l2, mean } => ExpansionKind::Ce1 { sigma, l1, l2, mean },
                            ExpansionSpec::Ce2 { decay } => ExpansionKind::Ce2 { decay },
                            ExpansionSpec::Ce3 { ell } => ExpansionKind::Ce3 { ell },
                        };
                        let std = SgfemProblem::param_std(measure).map_err(core_err("measure"))?;
                        let coeff = ParametricCoefficient::new(kind, self.n_terms.unwrap_or(100), std).map_err(core_err("expansion"))?;
                        let f = self.source.unwrap_or(1.0);
                        SgfemProblem::new(domain, coeff, measure, Arc::new(move |_| f)).map_err(core_err("measure"))?
                    }
                };
                let initial = match &self.initial_set {
                    None => presets::example4_initial_set(),
                    Some(v) => MultiIndexSet::new(v.iter().map(|d| MultiIndex::from_dense(d)).collect()).map_err(core_err("initial_set"))?,
                };
                let spatial = match self.estimator.unwrap_or(EstimatorName::Ees3) {
                    EstimatorName::Ees3 => SpatialEstimator::Ees3Tensor,
                    EstimatorName::Ees1 | EstimatorName::Ees1Linear => SpatialEstimator::Ees1Tensor(Bubble::Linear),
                    EstimatorName::Ees1Quadratic => SpatialEstimator::Ees1Tensor(Bubble::Quadratic),
                    other => return Err(bad("estimator", format!("{other:?} is not available for parametric problems").to_lowercase())),
                };
                let d = SgfemConfig::default();
                let version = match self.version.unwrap_or(2) {
                    1 => SgfemVersion::V1,
                    2 => SgfemVersion::V2,
                    v => return Err(bad("version", format!("must be 1 or 2, got {v}"))),
                };
                let m_bar = self.m_bar.unwrap_or(d.m_bar);
                if m_bar == 0 {
                    return Err(bad("m_bar", "must be at least 1"));
                }
                Ok(Job::Sgfem {
                    problem,
                    mesh,
                    initial,
                    config: SgfemConfig {
                        spatial,
                        subdivision: self.subdivision(),
                        theta_x: fraction("theta_x", self.theta_x.unwrap_or(d.theta_x))?,
                        theta_p: fraction("theta_p", self.theta_p.unwrap_or(d.theta_p))?,
                        m_bar,
                        version,
                        tol: self.tol(d.tol)?,
                        max_iter: self.max_iter.unwrap_or(d.max_iter),
                        minres_tol: positive("minres_tol", self.minres_tol.unwrap_or(d.minres_tol))?,
                        minres_maxit: self.minres_maxit.unwrap_or(d.minres_maxit),
                    },
                })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_preset_config() {
        let cfg = parse(r#"{"schema": 1, "mode": "deterministic", "preset": "example1", "estimator": "ees3"}"#).unwrap();
        let Job::Deterministic { config, probe, .. } = cfg.resolve().unwrap() else { panic!() };
        assert_eq!(config.estimator.strategy, Strategy::Ees3);
        assert_eq!(config.tol, 1e-3);
        assert!(probe.is_none());
    }

    #[test]
    fn errors_name_the_key() {
        for (text, key) in [
            (r#"{"schema": 1, "mode": "deterministic", "theta": "half"}"#, "theta"),
            (r#"{"schema": 1, "mode": "deterministic", "thetta": 0.5}"#, "thetta"),
            (r#"{"schema": 2, "mode": "sgfem"}"#, "schema"),
            (r#"{"schema": 1, "mode": "sgfem", "preset": "example1"}"#, "mode"),
        ] {
            let err = parse(text).and_then(|c| c.resolve().map(|_| ())).unwrap_err();
            assert_eq!(err.key, key, "{text}: {err}");
        }
        let err = parse(r#"{"schema": 1, "mode": "deterministic", "thetta": 0.5}"#).unwrap_err();
        assert!(err.message.contains("thetta"));
        let err = parse(r#"{"schema": 1, "mode": "deterministic", "domain": "square", "tol": -1}"#).unwrap().resolve().err().unwrap();
        assert_eq!(err.key, "tol");
    }

    #[test]
    fn custom_parametric_problem() {
        let text = r#"{"schema": 1, "mode": "sgfem", "domain": "square", "level": 1,
            "expansion": {"kind": "ce3", "ell": 1.0}, "measure": {"truncated_gaussian": 2.0}, "n_terms": 10, "initial_set": [[0], [1]]}"#;
        let Job::Sgfem { initial, config, .. } = parse(text).unwrap().resolve().unwrap() else { panic!() };
        assert_eq!(initial.len(), 2);
        assert_eq!(config.version, SgfemVersion::V2);
    }
}
