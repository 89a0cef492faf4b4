//! Predictive evaluation with the log-score and the multi-method harness.
//!
//! Each method identifies a prediction model on the training window and is
//! scored on the later test window:
//! `LS = −(1/|test|) Σ log P_{y_t}(z_t/(s·β̂) + η̂·h_t; α̂)` in nats.

use std::fmt::Write as _;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::identification::{
    fit_from, fit_full, online_gamma, outcome_frequencies, simple_alpha, simple_beta, simple_eta,
    FitConstraints, FitOptions, GammaTrace, IdentifiedModel, ModelPoint, Observation,
    OnlineGammaOptions, DEFAULT_SMOOTHING,
};
use crate::math;
use crate::outcome_model::{binomial_ac_params, free_alpha_count, AcParams, OutcomeScale};
use crate::rating_engine::{run_matches, EngineConfig, SkillState, TrajectoryOptions};
use crate::simulation::{map_replications, player_id, ReplicationOptions, SimConfig};

/// Per-sample log-likelihoods `log P_{y_t}(z_t/(sβ̂) + η̂h_t)`.
pub fn log_likelihoods(
    samples: &[Observation],
    model: &IdentifiedModel,
    scale: f64,
    scores: &OutcomeScale,
) -> Result<Vec<f64>> {
    let params = model.to_params(scale, scores)?;
    samples
        .iter()
        .map(|s| params.log_likelihood(s.outcome, s.diff, s.home_venue))
        .collect()
}

/// Mean negated log-likelihood over `samples`; lower is better.
pub fn log_score(
    samples: &[Observation],
    model: &IdentifiedModel,
    scale: f64,
    scores: &OutcomeScale,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("test window"));
    }
    let ll = log_likelihoods(samples, model, scale, scores)?;
    Ok(-ll.iter().sum::<f64>() / ll.len() as f64)
}

/// Log-score with a per-sample scale correction `β_t`.
pub fn log_score_varying_scale(
    samples: &[Observation],
    alpha: &[f64],
    hfa: f64,
    betas: &[f64],
    scale: f64,
    scores: &OutcomeScale,
) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("test window"));
    }
    if betas.len() != samples.len() {
        return Err(Error::InvalidParameter("one scale factor per sample".into()));
    }
    let params = AcParams::new(alpha.to_vec(), scores.clone(), scale, hfa)?;
    let mut total = 0.0;
    for (s, b) in samples.iter().zip(betas) {
        let p = params.with_scale(scale * b)?;
        total += p.log_likelihood(s.outcome, s.diff, s.home_venue)?;
    }
    Ok(-total / samples.len() as f64)
}

/// Model implied by multilevel Elo itself: binomial `α`, `β̂ = 1/(L−1)`, `η̂ = 0`.
pub fn conventional_model(scores: &OutcomeScale) -> Result<IdentifiedModel> {
    if !scores.is_uniform() {
        return Err(Error::InvalidParameter(
            "the Elo-equivalent AC model needs uniformly spaced scores".into(),
        ));
    }
    let l = scores.levels();
    let p = binomial_ac_params(l, 1.0, 0.0)?;
    IdentifiedModel::new("conventional", p.alpha().to_vec(), 0.0, 1.0 / (l - 1) as f64)
}

/// Prediction methods, ordered by increasing use of the data.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Conventional,
    SimpleNoHfa,
    SimpleWithHfa,
    OptimalScaling,
    OnlineAdaptive,
    FullyAdaptive,
    GeloReference,
    GroundTruth,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Conventional,
        Method::SimpleNoHfa,
        Method::SimpleWithHfa,
        Method::OptimalScaling,
        Method::OnlineAdaptive,
        Method::FullyAdaptive,
        Method::GeloReference,
        Method::GroundTruth,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Conventional => "conventional",
            Method::SimpleNoHfa => "simple-no-hfa",
            Method::SimpleWithHfa => "simple-with-hfa",
            Method::OptimalScaling => "optimal-scaling",
            Method::OnlineAdaptive => "online-adaptive",
            Method::FullyAdaptive => "fully-adaptive",
            Method::GeloReference => "gelo-reference",
            Method::GroundTruth => "ground-truth",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method {s}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationSpec {
    /// Training positions, half-open.
    pub train: Range<usize>,
    /// Test positions, half-open; must start at or after the end of `train`.
    pub test: Range<usize>,
    pub methods: Vec<Method>,
    #[serde(default = "default_smoothing")]
    pub smoothing: f64,
    #[serde(default)]
    pub online: OnlineGammaOptions,
}

fn default_smoothing() -> f64 {
    DEFAULT_SMOOTHING
}

impl EvaluationSpec {
    pub fn new(train: Range<usize>, test: Range<usize>, methods: Vec<Method>) -> Result<Self> {
        let spec = Self {
            train,
            test,
            methods,
            smoothing: DEFAULT_SMOOTHING,
            online: OnlineGammaOptions::default(),
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Train on `{4000..7999}`, test on `{8000..}` with every method.
    pub fn example4() -> Self {
        Self::new(4000..8000, 8000..12_000, Method::ALL.to_vec()).expect("valid preset")
    }

    pub fn validate(&self) -> Result<()> {
        if self.train.is_empty() {
            return Err(Error::Window("empty training window".into()));
        }
        if self.test.is_empty() {
            return Err(Error::Window("empty test window".into()));
        }
        if self.test.start < self.train.end {
            return Err(Error::Window(format!(
                "test window {:?} does not follow training window {:?}",
                self.test, self.train
            )));
        }
        if self.methods.is_empty() {
            return Err(Error::InvalidParameter("no methods requested".into()));
        }
        Ok(())
    }

    fn check_len(&self, n: usize) -> Result<()> {
        if self.test.end > n {
            return Err(Error::Window(format!(
                "test window {:?} exceeds {} samples",
                self.test, n
            )));
        }
        Ok(())
    }
}

/// Skill differences from a ranking run that ran with a known AC model.
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceRanking {
    pub observations: Vec<Observation>,
    pub model: AcParams,
}

/// Everything one realization provides to the harness.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationData {
    /// Scale of the ranking that produced the differences.
    pub scale: f64,
    pub scores: OutcomeScale,
    /// Differences and outcomes for every position `t`.
    pub observations: Vec<Observation>,
    /// G-Elo ranking run with the generator's `(α*, η*)`.
    pub gelo: Option<ReferenceRanking>,
    /// True differences with the generator model.
    pub ground_truth: Option<ReferenceRanking>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodOutcome {
    pub method: Method,
    pub model: Option<IdentifiedModel>,
    pub log_score: Option<f64>,
    pub error: Option<String>,
}

/// Identified models and log-scores of one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationResult {
    pub outcomes: Vec<MethodOutcome>,
    /// `β_t` trace of the online method, when it ran.
    #[serde(skip)]
    pub gamma_trace: Option<GammaTrace>,
}

struct Simple {
    alpha: Vec<f64>,
    beta: f64,
    hfa: Result<f64>,
}

fn simple_estimates(train: &[Observation], scores: &OutcomeScale, smoothing: f64) -> Result<Simple> {
    let freqs = outcome_frequencies(train, scores, smoothing)?;
    let alpha = simple_alpha(&freqs)?;
    let beta = simple_beta(&alpha, scores)?;
    let hfa = simple_eta(&freqs, &alpha, scores);
    Ok(Simple { alpha, beta, hfa })
}

fn free_part(alpha: &[f64]) -> Vec<f64> {
    let k = free_alpha_count(alpha.len());
    alpha[1..1 + k].to_vec()
}

/// Evaluates every method of `spec` on one realization. Failures of single
/// methods are recorded and do not stop the others.
pub fn evaluate_realization(spec: &EvaluationSpec, data: &RealizationData) -> Result<RealizationResult> {
    spec.validate()?;
    spec.check_len(data.observations.len())?;
    let obs = &data.observations;
    let train = &obs[spec.train.clone()];
    let test = &obs[spec.test.clone()];
    let scores = &data.scores;
    let window = Some((spec.train.start, spec.train.end));
    let simple = simple_estimates(train, scores, spec.smoothing);
    let fit_options = FitOptions {
        smoothing: spec.smoothing,
        ..FitOptions::default()
    };
    let mut gamma_trace = None;

    let mut outcomes = Vec::with_capacity(spec.methods.len());
    for &method in &spec.methods {
        let result: Result<(IdentifiedModel, f64)> = (|| match method {
            Method::Conventional => {
                let m = conventional_model(scores)?;
                let ls = log_score(test, &m, data.scale, scores)?;
                Ok((m, ls))
            }
            Method::SimpleNoHfa => {
                let s = simple.as_ref().map_err(Clone::clone)?;
                let m = IdentifiedModel::new(method.name(), s.alpha.clone(), 0.0, s.beta)?
                    .with_training((spec.train.start, spec.train.end), None);
                let ls = log_score(test, &m, data.scale, scores)?;
                Ok((m, ls))
            }
            Method::SimpleWithHfa => {
                let s = simple.as_ref().map_err(Clone::clone)?;
                let hfa = s.hfa.clone()?;
                let m = IdentifiedModel::new(method.name(), s.alpha.clone(), hfa, s.beta)?
                    .with_training((spec.train.start, spec.train.end), None);
                let ls = log_score(test, &m, data.scale, scores)?;
                Ok((m, ls))
            }
            Method::OptimalScaling => {
                let s = simple.as_ref().map_err(Clone::clone)?;
                let hfa = s.hfa.clone()?;
                let start = ModelPoint {
                    gamma: 1.0 / s.beta,
                    hfa,
                    free_alpha: free_part(&s.alpha),
                };
                let constraints = FitConstraints::scale_only(hfa, free_part(&s.alpha));
                let fit = fit_from(train, data.scale, scores, start, &constraints, &fit_options)?;
                let mut m = IdentifiedModel::from_fit(method.name(), &fit)?;
                m = m.with_training(window.unwrap(), Some(fit.loglik));
                let ls = log_score(test, &m, data.scale, scores)?;
                Ok((m, ls))
            }
            Method::OnlineAdaptive => {
                let s = simple.as_ref().map_err(Clone::clone)?;
                let hfa = s.hfa.clone()?;
                let options = OnlineGammaOptions {
                    initial_gamma: 1.0 / s.beta,
                    ..spec.online
                };
                let stream = &obs[spec.train.start..spec.test.end];
                let trace = online_gamma(stream, &s.alpha, hfa, scores, data.scale, &options)?;
                let offset = spec.test.start - spec.train.start;
                let betas: Vec<f64> = trace.betas().skip(offset).collect();
                let ls = log_score_varying_scale(test, &s.alpha, hfa, &betas, data.scale, scores)?;
                let mean_beta = betas.iter().sum::<f64>() / betas.len() as f64;
                let m = IdentifiedModel::new(method.name(), s.alpha.clone(), hfa, mean_beta)?
                    .with_training(window.unwrap(), None);
                gamma_trace = Some(trace);
                Ok((m, ls))
            }
            Method::FullyAdaptive => {
                let fit = fit_full(train, data.scale, scores, &FitConstraints::default(), &fit_options)?;
                let m = IdentifiedModel::from_fit(method.name(), &fit)?
                    .with_training(window.unwrap(), Some(fit.loglik));
                let ls = log_score(test, &m, data.scale, scores)?;
                Ok((m, ls))
            }
            Method::GeloReference => {
                let g = data
                    .gelo
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("no G-Elo reference ranking".into()))?;
                spec.check_len(g.observations.len())?;
                let free = g.model.free_alpha();
                let start = ModelPoint {
                    gamma: 1.0,
                    hfa: g.model.hfa(),
                    free_alpha: free.clone(),
                };
                let constraints = FitConstraints::scale_only(g.model.hfa(), free);
                let gtrain = &g.observations[spec.train.clone()];
                let fit = fit_from(gtrain, g.model.scale(), scores, start, &constraints, &fit_options)?;
                let m = IdentifiedModel::from_fit(method.name(), &fit)?
                    .with_training(window.unwrap(), Some(fit.loglik));
                let ls = log_score(&g.observations[spec.test.clone()], &m, g.model.scale(), scores)?;
                Ok((m, ls))
            }
            Method::GroundTruth => {
                let g = data
                    .ground_truth
                    .as_ref()
                    .ok_or_else(|| Error::InvalidParameter("no ground truth available".into()))?;
                spec.check_len(g.observations.len())?;
                let m = IdentifiedModel::new(method.name(), g.model.alpha().to_vec(), g.model.hfa(), 1.0)?;
                let ls = log_score(&g.observations[spec.test.clone()], &m, g.model.scale(), scores)?;
                Ok((m, ls))
            }
        })();
        outcomes.push(match result {
            Ok((model, ls)) => MethodOutcome {
                method,
                model: Some(model),
                log_score: Some(ls),
                error: None,
            },
            Err(e) => {
                log::warn!("method {method} failed: {e}");
                MethodOutcome {
                    method,
                    model: None,
                    log_score: None,
                    error: Some(e.to_string()),
                }
            }
        });
    }
    Ok(RealizationResult {
        outcomes,
        gamma_trace,
    })
}

/// `(mean, std)` over realizations; std uses `1/(J−1)` and is 0 for one value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let std = if values.len() > 1 {
            (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Some(Self { mean, std })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: Method,
    /// Mean of `α̂` per entry.
    pub alpha: Option<Vec<f64>>,
    pub alpha_1: Option<Summary>,
    pub beta: Option<Summary>,
    pub eta: Option<Summary>,
    pub log_score: Option<Summary>,
    pub succeeded: usize,
    pub failed: usize,
    /// First failure message, if any.
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvaluationReport {
    pub realizations: usize,
    pub methods: Vec<MethodSummary>,
}

impl EvaluationReport {
    pub fn from_results(spec: &EvaluationSpec, results: &[RealizationResult]) -> Self {
        let methods = spec
            .methods
            .iter()
            .map(|&method| {
                let rows: Vec<&MethodOutcome> = results
                    .iter()
                    .flat_map(|r| r.outcomes.iter().filter(move |o| o.method == method))
                    .collect();
                let ok: Vec<(&IdentifiedModel, f64)> = rows
                    .iter()
                    .filter_map(|o| Some((o.model.as_ref()?, o.log_score?)))
                    .collect();
                let col = |f: &dyn Fn(&IdentifiedModel) -> f64| {
                    Summary::of(&ok.iter().map(|(m, _)| f(m)).collect::<Vec<_>>())
                };
                let alpha = ok.first().map(|(m0, _)| {
                    (0..m0.alpha.len())
                        .map(|i| ok.iter().map(|(m, _)| m.alpha[i]).sum::<f64>() / ok.len() as f64)
                        .collect()
                });
                MethodSummary {
                    method,
                    alpha,
                    alpha_1: col(&|m| m.alpha.get(1).copied().unwrap_or(0.0))
                        .filter(|_| ok.first().is_some_and(|(m, _)| m.alpha.len() > 2)),
                    beta: col(&|m| m.beta),
                    eta: col(&|m| m.hfa),
                    log_score: Summary::of(&ok.iter().map(|(_, ls)| *ls).collect::<Vec<_>>()),
                    succeeded: ok.len(),
                    failed: rows.len() - ok.len(),
                    error: rows.iter().find_map(|o| o.error.clone()),
                }
            })
            .collect();
        Self {
            realizations: results.len(),
            methods,
        }
    }

    pub fn method(&self, method: Method) -> Option<&MethodSummary> {
        self.methods.iter().find(|m| m.method == method)
    }

    /// Number of method runs that failed.
    pub fn failures(&self) -> usize {
        self.methods.iter().map(|m| m.failed).sum()
    }

    /// Aligned text table with one row per method.
    pub fn to_table(&self) -> String {
        let fmt = |s: &Option<Summary>, digits: usize| match s {
            None => "-".to_string(),
            Some(s) if self.realizations > 1 => {
                format!("({:.*}, {:.*})", digits, s.mean, digits, s.std)
            }
            Some(s) => format!("{:.*}", digits, s.mean),
        };
        let header = ["method", "alpha_1", "beta", "eta", "LS"];
        let rows: Vec<[String; 5]> = self
            .methods
            .iter()
            .map(|m| {
                [
                    m.method.name().to_string(),
                    fmt(&m.alpha_1, 3),
                    fmt(&m.beta, 3),
                    fmt(&m.eta, 3),
                    fmt(&m.log_score, 3),
                ]
            })
            .collect();
        let mut widths = header.map(str::len);
        for r in &rows {
            for (w, c) in widths.iter_mut().zip(r) {
                *w = (*w).max(c.chars().count());
            }
        }
        let mut out = String::new();
        let line = |cells: &[&str], out: &mut String| {
            for (i, (c, w)) in cells.iter().zip(widths).enumerate() {
                if i == 0 {
                    let _ = write!(out, "{c:<w$}");
                } else {
                    let _ = write!(out, "  {c:>w$}");
                }
            }
            out.push('\n');
        };
        line(&header, &mut out);
        let rule: Vec<String> = widths.iter().map(|w| "-".repeat(*w)).collect();
        line(&rule.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        for r in &rows {
            line(&r.iter().map(String::as_str).collect::<Vec<_>>(), &mut out);
        }
        out
    }
}

/// Runs the harness on pre-computed realizations.
pub fn run_comparison(spec: &EvaluationSpec, data: &[RealizationData]) -> Result<(EvaluationReport, Vec<RealizationResult>)> {
    spec.validate()?;
    if data.is_empty() {
        return Err(Error::Empty("realizations"));
    }
    let results = data
        .iter()
        .map(|d| evaluate_realization(spec, d))
        .collect::<Result<Vec<_>>>()?;
    Ok((EvaluationReport::from_results(spec, &results), results))
}

/// Engines run on each synthetic realization.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSetup {
    pub sim: SimConfig,
    /// Ranking whose differences the data-driven methods use.
    pub engine: EngineConfig,
    /// G-Elo run with the generator's `α*` and `η*` at this scale.
    pub gelo_scale: Option<f64>,
}

impl SyntheticSetup {
    /// Ternary setup: Elo at `s = 174` without advantage, G-Elo reference.
    pub fn example4(step: f64) -> Result<Self> {
        let sim = SimConfig::example4(step);
        let engine = EngineConfig::elo(174.0, 0.0, sim.true_model.scores().clone());
        Ok(Self {
            sim,
            engine,
            gelo_scale: Some(174.0),
        })
    }

    /// Builds the harness inputs of realization `out`.
    pub fn realization_data(&self, out: &crate::simulation::SimOutput) -> Result<RealizationData> {
        let ids: Vec<_> = (0..self.sim.players).map(player_id).collect();
        let rank = |engine: &EngineConfig| -> Result<Vec<Observation>> {
            let mut state = SkillState::with_skills(
                engine.clone(),
                ids.iter().cloned().map(|id| (id, engine.initial_skill)),
            )?;
            let traj = run_matches(&mut state, &out.matches, TrajectoryOptions::diffs_only())?;
            let diffs: Vec<f64> = traj.diffs.iter().map(|(_, z)| *z).collect();
            Observation::from_matches(&out.matches, &diffs)
        };
        let scores = self.sim.true_model.scores().clone();
        let gelo = match self.gelo_scale {
            Some(scale) => {
                let model = self.sim.true_model.with_scale(scale)?;
                Some(ReferenceRanking {
                    observations: rank(&EngineConfig::gelo(&model))?,
                    model,
                })
            }
            None => None,
        };
        Ok(RealizationData {
            scale: self.engine.scale,
            scores,
            observations: rank(&self.engine)?,
            gelo,
            ground_truth: Some(ReferenceRanking {
                observations: Observation::from_matches(&out.matches, &out.true_diffs)?,
                model: self.sim.true_model.clone(),
            }),
        })
    }
}

/// Simulates `J` realizations in parallel and runs the harness on each.
pub fn run_synthetic_comparison(
    spec: &EvaluationSpec,
    setup: &SyntheticSetup,
    realizations: usize,
) -> Result<(EvaluationReport, Vec<RealizationResult>)> {
    spec.validate()?;
    if realizations == 0 {
        return Err(Error::Empty("realizations"));
    }
    let results = map_replications(&setup.sim, realizations, ReplicationOptions::default(), |_, out| {
        let data = setup.realization_data(&out)?;
        evaluate_realization(spec, &data)
    })?;
    Ok((EvaluationReport::from_results(spec, &results), results))
}

/// Log-score of the canonical logistic model `L(z/(sβ) + η·h)` on binary data.
pub fn binary_log_score(samples: &[Observation], scale: f64, beta: f64, hfa: f64) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::Empty("test window"));
    }
    let mut total = 0.0;
    for s in samples {
        if s.outcome > 1 {
            return Err(Error::OutcomeIndex {
                index: s.outcome,
                levels: 2,
            });
        }
        let u = s.diff / (scale * beta) + if s.home_venue { hfa } else { 0.0 };
        total += if s.outcome == 1 {
            math::log_sigmoid(u)
        } else {
            math::log_sigmoid(-u)
        };
    }
    Ok(-total / samples.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_model_scores_log_three() {
        let m = IdentifiedModel::new("u", vec![0.0; 3], 0.0, 1.0).unwrap();
        let s: Vec<_> = (0..9).map(|i| Observation::new(0.0, i % 3, false)).collect();
        let ls = log_score(&s, &m, 174.0, &OutcomeScale::uniform(3).unwrap()).unwrap();
        assert!((ls - 3f64.ln()).abs() < 1e-12);
        assert!(log_score(&[], &m, 174.0, &OutcomeScale::uniform(3).unwrap()).is_err());
    }

    #[test]
    fn conventional_models() {
        let m = conventional_model(&OutcomeScale::uniform(3).unwrap()).unwrap();
        assert!((m.alpha[1] - 2f64.ln()).abs() < 1e-12);
        assert_eq!((m.beta, m.hfa), (0.5, 0.0));
        let m = conventional_model(&OutcomeScale::binary()).unwrap();
        assert_eq!((m.beta, m.hfa), (1.0, 0.0));
        let m = conventional_model(&OutcomeScale::uniform(5).unwrap()).unwrap();
        assert_eq!(m.beta, 0.25);
        assert!((m.alpha[2] - 6f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn overlapping_windows_are_rejected() {
        assert!(EvaluationSpec::new(0..100, 50..150, Method::ALL.to_vec()).is_err());
        assert!(EvaluationSpec::new(0..100, 100..100, Method::ALL.to_vec()).is_err());
        assert!(EvaluationSpec::new(100..200, 0..50, Method::ALL.to_vec()).is_err());
        assert!(EvaluationSpec::new(0..100, 100..150, Method::ALL.to_vec()).is_ok());
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.name().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn missing_reference_gives_null_row() {
        let scores = OutcomeScale::uniform(3).unwrap();
        let obs: Vec<_> = (0..40)
            .map(|i| Observation::new((i % 7) as f64 * 10.0 - 30.0, i % 3, i % 2 == 0))
            .collect();
        let data = RealizationData {
            scale: 100.0,
            scores,
            observations: obs,
            gelo: None,
            ground_truth: None,
        };
        let spec = EvaluationSpec::new(0..20, 20..40, Method::ALL.to_vec()).unwrap();
        let (report, _) = run_comparison(&spec, &[data]).unwrap();
        let g = report.method(Method::GroundTruth).unwrap();
        assert_eq!((g.succeeded, g.failed), (0, 1));
        assert!(report.method(Method::Conventional).unwrap().log_score.is_some());
        assert!(report.failures() >= 2);
        assert!(report.to_table().contains("ground-truth"));
    }

    #[test]
    fn summary_statistics() {
        let s = Summary::of(&[1.0, 3.0]).unwrap();
        assert_eq!(s.mean, 2.0);
        assert!((s.std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(Summary::of(&[5.0]).unwrap().std, 0.0);
        assert!(Summary::of(&[]).is_none());
    }
}
