//! End-to-end runs behind the CLI subcommands. Every pipeline writes its
//! files into an output directory together with the merged configuration.

use std::collections::HashMap;
use std::path::{Path, PathBuf};

use gelo::diagnostics::{convergence_report_from_matches, ConvergenceReport};
use gelo::evaluation::{
    evaluate_realization, run_synthetic_comparison, EvaluationReport, RealizationData, SyntheticSetup,
};
use gelo::identification::{
    fit_full, outcome_frequencies, simple_alpha, simple_beta, simple_eta, FitConstraints,
    FitOptions, IdentifiedModel, Observation,
};
use gelo::outcome_model::{
    beta_ac_to_logistic, beta_base_change, beta_logistic_to_gaussian, rescale_hfa, AcParams, GaussianMatch,
    OutcomeScale,
};
use gelo::rating_engine::{
    run_matches, MatchRecord, PlayerEntry, PlayerId, SkillSnapshot, SkillState, TrajectoryOptions,
};
use gelo::simulation::{simulate, SimConfig};
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::csv_io::{self, ingest_matches, MatchLog};
use crate::error::{AppError, Result};
use crate::studies::{ensemble_convergence, scale_fit, EnsembleConvergence, ScaleFitReport};

pub const RESOLVED_CONFIG: &str = "config.resolved.toml";

/// Records the configuration that fully determines a run.
pub fn write_resolved_config(config: &RunConfig, out_dir: &Path) -> Result<()> {
    csv_io::write_text(&out_dir.join(RESOLVED_CONFIG), &config.to_toml()?)
}

/// True skills and generator settings written next to a simulated log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationTruth {
    pub config: SimConfig,
    pub players: Vec<String>,
    pub skills: Vec<f64>,
}

/// Simulates one realization and writes `matches.csv` and `truth.json`.
pub fn run_simulate(config: &RunConfig, out_dir: &Path) -> Result<Vec<MatchRecord>> {
    let sim = config.sim_config()?;
    let out = simulate(&sim)?;
    csv_io::write_matches(&out_dir.join("matches.csv"), &out.matches, None)?;
    let truth = SimulationTruth {
        players: (0..sim.players).map(|i| gelo::simulation::player_id(i).0).collect(),
        skills: out.skills.clone(),
        config: sim,
    };
    csv_io::write_json(&out_dir.join("truth.json"), &truth)?;
    write_resolved_config(config, out_dir)?;
    Ok(out.matches)
}

/// The match log named by `path`, the configured input, or a fresh simulation.
pub fn load_matches(config: &RunConfig, path: Option<&Path>) -> Result<MatchLog> {
    let path: Option<PathBuf> = path.map(Path::to_path_buf).or_else(|| config.input_path());
    match path {
        Some(p) => {
            let log = ingest_matches(&p, &config.ingest_options()?)?;
            log::info!("{}: {} matches", p.display(), log.records.len());
            Ok(log)
        }
        None => {
            let sim = config.sim_config()?;
            Ok(MatchLog {
                records: simulate(&sim)?.matches,
                supplied_skills: None,
                duplicate_lines: Vec::new(),
                warnings: Vec::new(),
            })
        }
    }
}

/// Pre-match skill differences: supplied columns when configured, otherwise
/// the engine's ranking.
pub fn skill_diffs(config: &RunConfig, log: &MatchLog) -> Result<Vec<f64>> {
    if config.use_supplied_skills() {
        return log
            .supplied_diffs()
            .ok_or_else(|| AppError::Config("input.use_supplied_skills set but the log has no skill columns".into()));
    }
    let mut state = SkillState::new(config.engine_config()?)?;
    let traj = run_matches(&mut state, &log.records, TrajectoryOptions::diffs_only())?;
    Ok(traj.diffs.into_iter().map(|(_, z)| z).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankSummary {
    pub matches: usize,
    pub players: usize,
    pub total_skill: f64,
    pub supplied_skills: bool,
    pub warnings: Vec<String>,
}

/// Latest supplied pre-match skill of every player, with match counters.
fn supplied_snapshot(log: &MatchLog, skills: &[(f64, f64)]) -> SkillSnapshot {
    let mut order: Vec<PlayerId> = Vec::new();
    let mut acc: HashMap<PlayerId, (f64, u64, f64)> = HashMap::new();
    for (m, &(h, a)) in log.records.iter().zip(skills) {
        for (id, s) in [(&m.home, h), (&m.away, a)] {
            let e = acc.entry(id.clone()).or_insert_with(|| {
                order.push(id.clone());
                (0.0, 0, 0.0)
            });
            *e = (s, e.1 + 1, e.2 + m.step);
        }
    }
    SkillSnapshot {
        entries: order
            .into_iter()
            .map(|id| {
                let (skill, n, k) = acc[&id];
                PlayerEntry {
                    player_id: id,
                    skill,
                    n_matches: n,
                    mean_step: k / n as f64,
                }
            })
            .collect(),
    }
}

/// Ranks the log and writes `snapshot.csv`, `snapshot.json`, `diffs.csv` and,
/// with a trajectory stride, `trajectory.csv`.
pub fn run_rank(config: &RunConfig, log: &MatchLog, out_dir: &Path) -> Result<RankSummary> {
    let (snapshot, diffs, total) = if config.use_supplied_skills() {
        let skills = log
            .supplied_skills
            .as_ref()
            .ok_or_else(|| AppError::Config("input.use_supplied_skills set but the log has no skill columns".into()))?;
        let diffs: Vec<f64> = skills.iter().map(|(h, a)| h - a).collect();
        let snap = supplied_snapshot(log, skills);
        let total = snap.entries.iter().map(|e| e.skill).sum();
        (snap, diffs, total)
    } else {
        let mut state = SkillState::new(config.engine_config()?)?;
        let options = TrajectoryOptions {
            stride: config.trajectory_stride(),
        };
        let traj = run_matches(&mut state, &log.records, options)?;
        if options.stride.is_some() {
            csv_io::write_trajectory(&out_dir.join("trajectory.csv"), &traj)?;
        }
        let diffs = traj.diffs.iter().map(|d| d.1).collect();
        (state.snapshot(), diffs, state.total_skill())
    };
    csv_io::write_snapshot(&out_dir.join("snapshot.csv"), &snapshot)?;
    csv_io::write_json(&out_dir.join("snapshot.json"), &snapshot)?;
    csv_io::write_diffs(&out_dir.join("diffs.csv"), &log.records, &diffs)?;
    write_resolved_config(config, out_dir)?;
    Ok(RankSummary {
        matches: log.records.len(),
        players: snapshot.entries.len(),
        total_skill: total,
        supplied_skills: config.use_supplied_skills(),
        warnings: log.warnings.clone(),
    })
}

/// Models identified on the training window of an observed log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Identification {
    pub scale: f64,
    pub train_window: (usize, usize),
    pub models: Vec<IdentifiedModel>,
    /// Methods that could not be identified, with the reason.
    pub failures: Vec<(String, String)>,
}

fn identify_observations(
    obs: &[Observation],
    scale: f64,
    scores: &OutcomeScale,
    train: std::ops::Range<usize>,
    smoothing: f64,
) -> Result<Identification> {
    let window = (train.start, train.end);
    let data = &obs[train];
    let mut models = Vec::new();
    let mut failures = Vec::new();
    let simple = (|| {
        let freqs = outcome_frequencies(data, scores, smoothing)?;
        let alpha = simple_alpha(&freqs)?;
        let beta = simple_beta(&alpha, scores)?;
        let hfa = simple_eta(&freqs, &alpha, scores)?;
        IdentifiedModel::new("simple-with-hfa", alpha, hfa, beta)
    })();
    match simple {
        Ok(m) => models.push(m.with_training(window, None)),
        Err(e) => failures.push(("simple-with-hfa".to_string(), e.to_string())),
    }
    let options = FitOptions {
        smoothing,
        ..FitOptions::default()
    };
    let full = fit_full(data, scale, scores, &FitConstraints::default(), &options)
        .and_then(|fit| Ok(IdentifiedModel::from_fit("fully-adaptive", &fit)?.with_training(window, Some(fit.loglik))));
    match full {
        Ok(m) => models.push(m),
        Err(e) if models.is_empty() => return Err(e.into()),
        Err(e) => failures.push(("fully-adaptive".to_string(), e.to_string())),
    }
    Ok(Identification {
        scale,
        train_window: window,
        models,
        failures,
    })
}

/// Output of `identify`: models fitted to a log, or the binary scale-fit
/// study when no log is given and a simulation is configured.
#[derive(Debug, Clone, PartialEq)]
pub enum IdentifyOutput {
    Data(Identification),
    Study(ScaleFitReport),
}

pub fn run_identify(config: &RunConfig, matches: Option<&Path>, out_dir: &Path) -> Result<IdentifyOutput> {
    let scale = config.canonical_scale()?;
    let output = if matches.is_some() || config.input_path().is_some() {
        let log = load_matches(config, matches)?;
        let diffs = skill_diffs(config, &log)?;
        let obs = Observation::from_matches(&log.records, &diffs)?;
        let (train, _) = config.windows(obs.len())?;
        let scores = OutcomeScale::uniform(config.levels())?;
        let smoothing = config.evaluation_spec(obs.len()).map(|s| s.smoothing).unwrap_or(0.5);
        let id = identify_observations(&obs, scale, &scores, train, smoothing)?;
        csv_io::write_json(&out_dir.join("identified.json"), &id)?;
        IdentifyOutput::Data(id)
    } else {
        let sim = config.sim_config()?;
        let (window, _) = config.windows(sim.matches)?;
        let report = scale_fit(&sim, &config.engine_config()?, scale, config.realizations(), window)?;
        csv_io::write_json(&out_dir.join("scale_fit.json"), &report)?;
        csv_io::write_text(&out_dir.join("scale_fit.txt"), &report.to_table())?;
        IdentifyOutput::Study(report)
    };
    write_resolved_config(config, out_dir)?;
    Ok(output)
}

/// Runs the method comparison on a log or on simulated realizations and
/// writes `report.json`, `report.txt` and, when the online method ran,
/// `gamma_trace.csv`.
pub fn run_evaluate(config: &RunConfig, matches: Option<&Path>, out_dir: &Path) -> Result<EvaluationReport> {
    let scale = config.canonical_scale()?;
    let (spec, report, trace) = if matches.is_some() || config.input_path().is_some() {
        let log = load_matches(config, matches)?;
        let diffs = skill_diffs(config, &log)?;
        let spec = config.evaluation_spec(log.records.len())?;
        let data = RealizationData {
            scale,
            scores: OutcomeScale::uniform(config.levels())?,
            observations: Observation::from_matches(&log.records, &diffs)?,
            gelo: None,
            ground_truth: None,
        };
        let result = evaluate_realization(&spec, &data)?;
        let report = EvaluationReport::from_results(&spec, std::slice::from_ref(&result));
        (spec, report, result.gamma_trace)
    } else {
        let sim = config.sim_config()?;
        let spec = config.evaluation_spec(sim.matches)?;
        let setup = SyntheticSetup {
            sim,
            engine: config.engine_config()?,
            gelo_scale: config.gelo_reference().then_some(scale),
        };
        let (report, mut results) = run_synthetic_comparison(&spec, &setup, config.realizations())?;
        let trace = results.first_mut().and_then(|r| r.gamma_trace.take());
        (spec, report, trace)
    };
    let failures = report.failures();
    if failures > 0 {
        log::warn!("{failures} method evaluations failed; their rows are empty");
    }
    csv_io::write_json(&out_dir.join("report.json"), &report)?;
    csv_io::write_text(&out_dir.join("report.txt"), &report.to_table())?;
    if let Some(t) = trace {
        csv_io::write_gamma_trace(&out_dir.join("gamma_trace.csv"), &t, spec.train.start)?;
    }
    write_resolved_config(config, out_dir)?;
    Ok(report)
}

/// Convergence counters of the matches up to one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointSummary {
    pub label: String,
    pub matches: usize,
    pub mean_variance: f64,
    pub fraction_lambda_ge_1: f64,
    pub fraction_lambda_ge_2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ConvergenceOutput {
    Checkpoints(Vec<(CheckpointSummary, ConvergenceReport)>),
    Ensemble(EnsembleConvergence),
}

/// Number of leading matches covered by `checkpoint`: a match count, or an
/// inclusive ISO-8601 date compared with the match dates.
fn checkpoint_prefix(records: &[MatchRecord], checkpoint: &str) -> Result<usize> {
    if let Ok(n) = checkpoint.parse::<usize>() {
        return Ok(n.min(records.len()));
    }
    if records.iter().any(|m| m.timestamp.is_none()) {
        return Err(AppError::Config(format!(
            "date checkpoint {checkpoint} needs dates on every match"
        )));
    }
    Ok(records.partition_point(|m| m.timestamp.as_deref().is_some_and(|d| d <= checkpoint)))
}

fn file_label(label: &str) -> String {
    label
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' { c } else { '_' })
        .collect()
}

/// Per-player `Λ` reports at each checkpoint of a log, or the ensemble
/// convergence study for a simulation without a log.
pub fn run_convergence(config: &RunConfig, matches: Option<&Path>, out_dir: &Path) -> Result<ConvergenceOutput> {
    let scale = config.canonical_scale()?;
    let output = if matches.is_some() || config.input_path().is_some() {
        let log = load_matches(config, matches)?;
        let mut checkpoints = config.checkpoints();
        if checkpoints.is_empty() {
            checkpoints.push(log.records.len().to_string());
        }
        let mut out = Vec::with_capacity(checkpoints.len());
        for cp in &checkpoints {
            let n = checkpoint_prefix(&log.records, cp)?;
            let report = convergence_report_from_matches(&log.records[..n], scale)?;
            let label = file_label(cp);
            csv_io::write_convergence(&out_dir.join(format!("convergence_{label}.csv")), &report)?;
            csv_io::write_lambda_cdf(&out_dir.join(format!("lambda_cdf_{label}.csv")), &report)?;
            let summary = CheckpointSummary {
                label: cp.clone(),
                matches: n,
                mean_variance: report.mean_variance,
                fraction_lambda_ge_1: report.fraction_lambda_ge_1,
                fraction_lambda_ge_2: report.fraction_lambda_ge_2,
            };
            out.push((summary, report));
        }
        let summaries: Vec<_> = out.iter().map(|(s, _)| s.clone()).collect();
        csv_io::write_json(&out_dir.join("convergence.json"), &summaries)?;
        ConvergenceOutput::Checkpoints(out)
    } else {
        let sim = config.sim_config()?;
        let stride = config.trajectory_stride().unwrap_or(sim.players / 2).max(1);
        let study = ensemble_convergence(
            &sim,
            &config.engine_config()?,
            scale,
            config.realizations(),
            stride,
            config.burn_in(),
        )?;
        csv_io::write_json(&out_dir.join("ensemble.json"), &study)?;
        csv_io::write_rows(&out_dir.join("ensemble_trajectory.csv"), "gelo-ensemble", &study.rows)?;
        ConvergenceOutput::Ensemble(study)
    };
    write_resolved_config(config, out_dir)?;
    Ok(output)
}

/// Inputs of `convert-scale`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionRequest {
    /// Scale in the units of `base`.
    pub scale: f64,
    /// Base of the exponential in the expected score; `e` when absent.
    pub base: Option<f64>,
    pub hfa: f64,
    /// Outcome levels and free `α` entries of a symmetric AC model.
    pub levels: Option<usize>,
    pub alpha: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionReport {
    pub request: ConversionRequest,
    /// `ln(base)`, 1 for the natural base.
    pub base_factor: f64,
    pub canonical_scale: f64,
    /// Advantage at the canonical scale; `η·s` is preserved.
    pub canonical_hfa: f64,
    pub gaussian_factor_derivative: f64,
    pub gaussian_factor_moment: f64,
    /// Scales of the matching Gaussian-CDF expected score.
    pub gaussian_scale_derivative: f64,
    pub gaussian_scale_moment: f64,
    /// Slope-matching factor from the AC model to the logistic, if `α` given.
    pub ac_to_logistic: Option<f64>,
    pub logistic_scale_of_ac: Option<f64>,
}

pub fn convert_scale(request: &ConversionRequest) -> Result<ConversionReport> {
    let base_factor = match request.base {
        Some(b) => beta_base_change(b)?.factor,
        None => 1.0,
    };
    let canonical_scale = request.scale / base_factor;
    let canonical_hfa = rescale_hfa(request.hfa, 1.0 / base_factor)?.hfa;
    let derivative = beta_logistic_to_gaussian(GaussianMatch::Derivative).factor;
    let moment = beta_logistic_to_gaussian(GaussianMatch::Moment).factor;
    let ac = match (&request.alpha, request.levels) {
        (Some(alpha), Some(levels)) => {
            let params = AcParams::symmetric(alpha, OutcomeScale::uniform(levels)?, canonical_scale, canonical_hfa)?;
            Some(beta_ac_to_logistic(&params)?.factor)
        }
        (None, None) => None,
        _ => return Err(AppError::Config("give both levels and alpha for the AC conversion".into())),
    };
    Ok(ConversionReport {
        request: request.clone(),
        base_factor,
        canonical_scale,
        canonical_hfa,
        gaussian_factor_derivative: derivative,
        gaussian_factor_moment: moment,
        gaussian_scale_derivative: canonical_scale * derivative,
        gaussian_scale_moment: canonical_scale * moment,
        ac_to_logistic: ac,
        logistic_scale_of_ac: ac.map(|b| canonical_scale * b),
    })
}
