//! TOML run configuration with named presets.
//!
//! A user file is merged key by key over its preset, so any preset value can
//! be overridden. The merged file is written next to every run's outputs.

use std::ops::Range;
use std::path::{Path, PathBuf};

use gelo::evaluation::{EvaluationSpec, Method};
use gelo::identification::{OnlineGammaOptions, DEFAULT_SMOOTHING};
use gelo::outcome_model::{beta_base_change, AcParams, OutcomeScale};
use gelo::rating_engine::{EloScore, EngineConfig};
use gelo::simulation::{Pairing, SimConfig, StepPolicy};
use serde::{Deserialize, Serialize};

use crate::csv_io::{DiscretizationRule, IngestOptions};
use crate::error::{AppError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Preset {
    /// Binary convergence ensemble: 30 players, `s = 174`, random steps.
    Example1,
    /// Binary scale fit on the last 2000 matches of the `Example1` setup.
    Example2,
    /// Ternary identification comparison with `α₁* = −0.4`, `η* = 0.35`.
    Example4,
    /// User-supplied FIFA-style log with pre-match skills.
    Fifa,
}

impl std::str::FromStr for Preset {
    type Err = AppError;
    fn from_str(s: &str) -> Result<Self> {
        toml::Value::String(s.to_string())
            .try_into()
            .map_err(|_| AppError::Config(format!("unknown preset {s}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StepMode {
    PerMatch,
    PerRealization,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlgorithmName {
    Elo,
    Gelo,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ScoreFunction {
    Logistic,
    GaussianCdf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    GoalDifference5,
    WinDrawLoss,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub players: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub skill_variance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Free entries of a symmetric `α*`; empty for the binary logistic.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hfa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub generator_scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub steps: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub step_mode: Option<StepMode>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pairing: Option<Pairing>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub home_fraction: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub standardize_skills: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EngineSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub algorithm: Option<AlgorithmName>,
    /// Scale in the units of `base`; the canonical scale is `scale / ln(base)`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub scale: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub base: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreFunction>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub hfa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub levels: Option<usize>,
    /// Free entries of a symmetric `α` for G-Elo.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub initial_skill: Option<f64>,
    /// Record skills after every `n` matches; 0 disables.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trajectory_stride: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matches: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rule: Option<RuleName>,
    /// Explicit cut points; takes precedence over `rule`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cuts: Option<Vec<i64>>,
    /// Take pre-match differences from the skill columns instead of ranking.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub use_supplied_skills: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvaluationSection {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_start: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub train_end: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_start: Option<usize>,
    /// Defaults to the number of matches.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub test_end: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub methods: Option<Vec<Method>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub smoothing: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub online_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub online_rate: Option<f64>,
    /// Run a G-Elo ranking with the generator's `α*` and `η*` (simulation only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gelo_reference: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConvergenceSection {
    /// Dates (inclusive, ISO-8601) or match counts at which to report.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub checkpoints: Option<Vec<String>>,
    /// Matches excluded before ensemble variances are averaged.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub burn_in: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub preset: Option<Preset>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub realizations: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimulationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub engine: Option<EngineSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub input: Option<InputSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub evaluation: Option<EvaluationSection>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convergence: Option<ConvergenceSection>,
}

fn example1_simulation(steps: Vec<f64>) -> SimulationSection {
    SimulationSection {
        players: Some(30),
        matches: Some(15_000),
        skill_variance: Some(0.5),
        levels: Some(2),
        alpha: Some(vec![]),
        hfa: Some(0.35),
        generator_scale: Some(1.0),
        steps: Some(steps),
        step_mode: Some(StepMode::PerRealization),
        pairing: Some(Pairing::RandomRound),
        home_fraction: Some(1.0),
        standardize_skills: Some(true),
    }
}

fn elo_engine(scale: f64, hfa: f64, levels: usize) -> EngineSection {
    EngineSection {
        algorithm: Some(AlgorithmName::Elo),
        scale: Some(scale),
        base: None,
        score: Some(ScoreFunction::Logistic),
        hfa: Some(hfa),
        levels: Some(levels),
        alpha: None,
        initial_skill: Some(0.0),
        trajectory_stride: Some(0),
    }
}

impl Preset {
    /// Fully specified configuration of the preset.
    pub fn config(self) -> RunConfig {
        let base = RunConfig {
            preset: Some(self),
            seed: Some(1),
            realizations: Some(200),
            ..RunConfig::default()
        };
        match self {
            Preset::Example1 => RunConfig {
                simulation: Some(example1_simulation(vec![10.0, 20.0, 30.0])),
                engine: Some(EngineSection {
                    trajectory_stride: Some(15),
                    ..elo_engine(174.0, 0.35, 2)
                }),
                convergence: Some(ConvergenceSection {
                    checkpoints: Some(vec![]),
                    burn_in: Some(3000),
                }),
                ..base
            },
            Preset::Example2 => RunConfig {
                simulation: Some(example1_simulation(vec![10.0, 20.0, 30.0])),
                engine: Some(elo_engine(174.0, 0.35, 2)),
                evaluation: Some(EvaluationSection {
                    train_start: Some(13_000),
                    train_end: Some(15_000),
                    ..EvaluationSection::default()
                }),
                ..base
            },
            Preset::Example4 => RunConfig {
                simulation: Some(SimulationSection {
                    matches: Some(12_000),
                    levels: Some(3),
                    alpha: Some(vec![-0.4]),
                    steps: Some(vec![20.0]),
                    step_mode: Some(StepMode::PerMatch),
                    pairing: Some(Pairing::RandomPair),
                    ..example1_simulation(vec![])
                }),
                engine: Some(elo_engine(174.0, 0.0, 3)),
                evaluation: Some(EvaluationSection {
                    train_start: Some(4000),
                    train_end: Some(8000),
                    test_start: Some(8000),
                    test_end: Some(12_000),
                    methods: Some(Method::ALL.to_vec()),
                    smoothing: Some(DEFAULT_SMOOTHING),
                    online_window: Some(100),
                    online_rate: Some(0.05),
                    gelo_reference: Some(true),
                }),
                ..base
            },
            Preset::Fifa => RunConfig {
                realizations: Some(1),
                engine: Some(EngineSection {
                    base: Some(10.0),
                    ..elo_engine(600.0, 0.0, 3)
                }),
                input: Some(InputSection {
                    matches: None,
                    rule: None,
                    cuts: None,
                    use_supplied_skills: Some(true),
                }),
                evaluation: Some(EvaluationSection {
                    train_start: Some(2000),
                    train_end: Some(4000),
                    test_start: Some(4000),
                    test_end: None,
                    methods: Some(vec![
                        Method::Conventional,
                        Method::SimpleNoHfa,
                        Method::SimpleWithHfa,
                        Method::OptimalScaling,
                        Method::OnlineAdaptive,
                        Method::FullyAdaptive,
                    ]),
                    smoothing: Some(DEFAULT_SMOOTHING),
                    online_window: Some(100),
                    online_rate: Some(0.05),
                    gelo_reference: Some(false),
                }),
                convergence: Some(ConvergenceSection {
                    checkpoints: Some(vec!["2020-12-31".into(), "2022-12-31".into(), "2024-12-31".into()]),
                    burn_in: Some(0),
                }),
                ..base
            },
        }
    }
}

fn merge(base: &mut toml::Value, over: toml::Value) {
    match (base, over) {
        (toml::Value::Table(b), toml::Value::Table(o)) => {
            for (k, v) in o {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| AppError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))?;
        Self::from_toml(&text).map_err(|e| AppError::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| AppError::Config(e.to_string()))
    }

    /// This configuration merged over its preset (or `fallback`).
    pub fn with_preset_defaults(&self, fallback: Option<Preset>) -> Result<Self> {
        let Some(preset) = self.preset.or(fallback) else {
            return Ok(self.clone());
        };
        let to_value = |c: &RunConfig| toml::Value::try_from(c).map_err(|e| AppError::Config(e.to_string()));
        let mut merged = to_value(&preset.config())?;
        merge(&mut merged, to_value(self)?);
        let mut out: RunConfig = merged.try_into().map_err(|e: toml::de::Error| AppError::Config(e.to_string()))?;
        out.preset = Some(preset);
        Ok(out)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn realizations(&self) -> usize {
        self.realizations.unwrap_or(1)
    }

    pub fn sim_config(&self) -> Result<SimConfig> {
        let s = self
            .simulation
            .as_ref()
            .ok_or_else(|| AppError::Config("no [simulation] section".into()))?;
        let need = |name: &str| AppError::Config(format!("simulation.{name} is required"));
        let levels = s.levels.unwrap_or(2);
        let alpha = s.alpha.clone().unwrap_or_default();
        let generator_scale = s.generator_scale.unwrap_or(1.0);
        let hfa = s.hfa.unwrap_or(0.0);
        let true_model = if levels == 2 && alpha.is_empty() {
            AcParams::logistic(generator_scale, hfa)?
        } else {
            AcParams::symmetric(&alpha, OutcomeScale::uniform(levels)?, generator_scale, hfa)?
        };
        let steps = s.steps.clone().ok_or_else(|| need("steps"))?;
        let step_policy = match (steps.len(), s.step_mode.unwrap_or(StepMode::PerMatch)) {
            (0, _) => return Err(need("steps")),
            (1, _) => StepPolicy::constant(steps[0]),
            (_, StepMode::PerMatch) => StepPolicy::uniform_choice(steps),
            (_, StepMode::PerRealization) => StepPolicy::per_realization(steps),
        };
        let config = SimConfig {
            players: s.players.ok_or_else(|| need("players"))?,
            matches: s.matches.ok_or_else(|| need("matches"))?,
            skill_variance: s.skill_variance.ok_or_else(|| need("skill_variance"))?,
            true_model,
            step_policy,
            pairing: s.pairing.unwrap_or_default(),
            home_fraction: s.home_fraction.unwrap_or(1.0),
            standardize_skills: s.standardize_skills.unwrap_or(false),
            seed: self.seed(),
        };
        config.validate()?;
        Ok(config)
    }

    fn engine_section(&self) -> EngineSection {
        self.engine.clone().unwrap_or_default()
    }

    pub fn levels(&self) -> usize {
        let e = self.engine_section();
        e.levels
            .or_else(|| self.simulation.as_ref().and_then(|s| s.levels))
            .unwrap_or(2)
    }

    /// Scale of the natural-base logistic equivalent to the engine's scale.
    pub fn canonical_scale(&self) -> Result<f64> {
        let e = self.engine_section();
        let scale = e.scale.ok_or_else(|| AppError::Config("engine.scale is required".into()))?;
        Ok(match e.base {
            Some(b) => scale / beta_base_change(b)?.factor,
            None => scale,
        })
    }

    pub fn engine_config(&self) -> Result<EngineConfig> {
        let e = self.engine_section();
        let scale = e.scale.ok_or_else(|| AppError::Config("engine.scale is required".into()))?;
        let hfa = e.hfa.unwrap_or(0.0);
        let scores = OutcomeScale::uniform(self.levels())?;
        let config = match e.algorithm.unwrap_or(AlgorithmName::Elo) {
            AlgorithmName::Elo => {
                let score = match (e.score.unwrap_or(ScoreFunction::Logistic), e.base) {
                    (ScoreFunction::Logistic, None) => EloScore::Logistic,
                    (ScoreFunction::Logistic, Some(base)) => EloScore::GeneralizedLogistic { base },
                    (ScoreFunction::GaussianCdf, None) => EloScore::GaussianCdf,
                    (ScoreFunction::GaussianCdf, Some(_)) => {
                        return Err(AppError::Config("engine.base applies to the logistic score only".into()))
                    }
                };
                EngineConfig::elo_with(scale, hfa, scores, score)
            }
            AlgorithmName::Gelo => {
                if e.base.is_some() {
                    return Err(AppError::Config("engine.base is not used by G-Elo".into()));
                }
                let alpha = e.alpha.clone().unwrap_or_default();
                EngineConfig::gelo(&AcParams::symmetric(&alpha, scores, scale, hfa)?)
            }
        };
        Ok(config.with_initial_skill(e.initial_skill.unwrap_or(0.0)))
    }

    pub fn trajectory_stride(&self) -> Option<usize> {
        self.engine_section().trajectory_stride.filter(|&s| s > 0)
    }

    pub fn ingest_options(&self) -> Result<IngestOptions> {
        let input = self.input.clone().unwrap_or_default();
        let rule = match (input.cuts, input.rule) {
            (Some(cuts), _) => Some(DiscretizationRule::new(cuts).map_err(AppError::Config)?),
            (None, Some(RuleName::GoalDifference5)) => Some(DiscretizationRule::goal_difference_5()),
            (None, Some(RuleName::WinDrawLoss)) => Some(DiscretizationRule::win_draw_loss()),
            (None, None) => None,
        };
        let levels = self.levels();
        if let Some(r) = &rule {
            if r.levels() != levels {
                return Err(AppError::Config(format!(
                    "discretization rule has {} levels but the engine uses {levels}",
                    r.levels()
                )));
            }
        }
        Ok(IngestOptions { levels, rule })
    }

    pub fn input_path(&self) -> Option<PathBuf> {
        self.input.as_ref().and_then(|i| i.matches.clone())
    }

    pub fn use_supplied_skills(&self) -> bool {
        self.input
            .as_ref()
            .and_then(|i| i.use_supplied_skills)
            .unwrap_or(false)
    }

    /// Evaluation windows for a log of `n` matches.
    pub fn evaluation_spec(&self, n: usize) -> Result<EvaluationSpec> {
        let e = self.evaluation.clone().unwrap_or_default();
        let (train, test) = self.windows(n)?;
        let spec = EvaluationSpec {
            train,
            test,
            methods: e.methods.unwrap_or_else(|| Method::ALL.to_vec()),
            smoothing: e.smoothing.unwrap_or(DEFAULT_SMOOTHING),
            online: OnlineGammaOptions {
                window: e.online_window.unwrap_or(100),
                rate: e.online_rate.unwrap_or(0.05),
                ..OnlineGammaOptions::default()
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    /// `(train, test)` windows; the training window defaults to the first half.
    pub fn windows(&self, n: usize) -> Result<(Range<usize>, Range<usize>)> {
        let e = self.evaluation.clone().unwrap_or_default();
        let train_start = e.train_start.unwrap_or(0);
        let train_end = e.train_end.unwrap_or(n / 2);
        let test_start = e.test_start.unwrap_or(train_end);
        let test_end = e.test_end.unwrap_or(n);
        if train_end > n || test_end > n {
            return Err(AppError::Core(gelo::Error::Window(format!(
                "windows {train_start}..{train_end} / {test_start}..{test_end} exceed {n} matches"
            ))));
        }
        Ok((train_start..train_end, test_start..test_end))
    }

    pub fn gelo_reference(&self) -> bool {
        self.evaluation
            .as_ref()
            .and_then(|e| e.gelo_reference)
            .unwrap_or(false)
    }

    pub fn checkpoints(&self) -> Vec<String> {
        self.convergence
            .as_ref()
            .and_then(|c| c.checkpoints.clone())
            .unwrap_or_default()
    }

    pub fn burn_in(&self) -> usize {
        self.convergence.as_ref().and_then(|c| c.burn_in).unwrap_or(0)
    }
}
