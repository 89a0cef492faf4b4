//! Monte-Carlo studies over simulated ensembles: convergence of the Elo
//! skills and the noise-corrected scale of the binary predictor.

use gelo::diagnostics::{
    asymptotic_variance, effective_params, expected_trajectory, time_constant, NoiseModel,
};
use gelo::evaluation::{binary_log_score, Summary};
use gelo::identification::{fit_binary, Observation};
use gelo::rating_engine::{run_matches, EngineConfig, SkillState, TrajectoryOptions};
use gelo::simulation::{generate_skills, map_replications, player_id, EnsembleStats, ReplicationOptions, SimConfig};
use serde::{Deserialize, Serialize};

use crate::error::{AppError, Result};

/// Ensemble statistics of one player at one checkpoint.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckpointRow {
    /// Matches played in total when the checkpoint was taken.
    pub t: usize,
    pub player_id: String,
    /// Matches played by this player, averaged over realizations.
    pub player_matches: f64,
    /// Rescaled true skill `θ*·s/s*`.
    pub limit: f64,
    /// Exponential approach predicted from the time constant.
    pub predicted_mean: f64,
    pub ensemble_mean: f64,
    pub ensemble_variance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConvergence {
    pub realizations: usize,
    pub mean_step: f64,
    /// `τ̄ = 4s/K̄` in matches of one player.
    pub time_constant: f64,
    /// `s·K̄/2`.
    pub predicted_variance: f64,
    /// Ensemble variance averaged over players and checkpoints after burn-in.
    pub converged_variance: f64,
    /// Share of (checkpoint, player) cells whose ensemble mean lies within one
    /// standard error of the mean, `√(var/J)`, of the predicted mean.
    pub mean_error_band_coverage: f64,
    /// Share of cells within `±√v̄` of the predicted mean.
    pub deviation_band_coverage: f64,
    /// Mean of `ensemble mean − predicted mean` after burn-in.
    pub converged_bias: f64,
    #[serde(skip)]
    pub rows: Vec<CheckpointRow>,
}

/// Runs `J` ranked realizations, records skills every `stride` matches and
/// compares ensemble moments with the convergence predictions.
pub fn ensemble_convergence(
    sim: &SimConfig,
    engine: &EngineConfig,
    scale: f64,
    realizations: usize,
    stride: usize,
    burn_in: usize,
) -> Result<EnsembleConvergence> {
    if realizations < 2 {
        return Err(AppError::Config("an ensemble needs at least two realizations".into()));
    }
    if stride == 0 {
        return Err(AppError::Config("engine.trajectory_stride must be positive".into()));
    }
    let m = sim.players;
    let runs = map_replications(sim, realizations, ReplicationOptions::default(), |_, out| {
        let mut state = SkillState::with_skills(
            engine.clone(),
            (0..m).map(|i| (player_id(i), engine.initial_skill)),
        )?;
        let traj = run_matches(&mut state, &out.matches, TrajectoryOptions { stride: Some(stride) })?;
        // per-player match counts at each recorded point
        let index: std::collections::HashMap<_, _> = (0..m).map(|i| (player_id(i), i)).collect();
        let mut counts = vec![0u32; m];
        let mut count_points = Vec::with_capacity(traj.points.len());
        for (n, rec) in out.matches.iter().enumerate() {
            counts[index[&rec.home]] += 1;
            counts[index[&rec.away]] += 1;
            if (n + 1) % stride == 0 {
                count_points.push(counts.clone());
            }
        }
        let skills: Vec<(usize, Vec<f64>)> = traj.points.into_iter().map(|p| (p.t, p.skills)).collect();
        Ok((skills, count_points))
    })?;

    let truth = generate_skills(sim)?;
    let ratio = scale / sim.generator_scale();
    let mean_step = sim.step_policy.mean();
    let tau = time_constant(scale, mean_step)?;
    let vbar = asymptotic_variance(scale, mean_step)?;
    let j = realizations as f64;
    let n_points = runs[0].0.len();

    let mut rows = Vec::with_capacity(n_points * m);
    let (mut var_sum, mut bias_sum, mut late) = (0.0, 0.0, 0usize);
    let (mut in_mean_band, mut in_dev_band) = (0usize, 0usize);
    for k in 0..n_points {
        let stats = EnsembleStats::from_samples(runs.iter().map(|r| r.0[k].1.as_slice()))?;
        let t = runs[0].0[k].0;
        for p in 0..m {
            let played = runs.iter().map(|r| f64::from(r.1[k][p])).sum::<f64>() / j;
            let limit = truth[p] * ratio;
            let predicted = expected_trajectory(engine.initial_skill, limit, tau, played);
            let gap = (stats.mean[p] - predicted).abs();
            if gap <= (stats.variance[p] / j).sqrt() {
                in_mean_band += 1;
            }
            if gap <= vbar.sqrt() {
                in_dev_band += 1;
            }
            if t >= burn_in {
                var_sum += stats.variance[p];
                bias_sum += stats.mean[p] - predicted;
                late += 1;
            }
            rows.push(CheckpointRow {
                t,
                player_id: player_id(p).0,
                player_matches: played,
                limit,
                predicted_mean: predicted,
                ensemble_mean: stats.mean[p],
                ensemble_variance: stats.variance[p],
            });
        }
    }
    if late == 0 {
        return Err(AppError::Config(format!(
            "burn-in {burn_in} leaves no checkpoints in {} matches",
            sim.matches
        )));
    }
    let cells = rows.len() as f64;
    Ok(EnsembleConvergence {
        realizations,
        mean_step,
        time_constant: tau,
        predicted_variance: vbar,
        converged_variance: var_sum / late as f64,
        mean_error_band_coverage: in_mean_band as f64 / cells,
        deviation_band_coverage: in_dev_band as f64 / cells,
        converged_bias: bias_sum / late as f64,
        rows,
    })
}

/// One row of the binary scale-fit comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFitRow {
    pub method: String,
    pub beta: Summary,
    pub eta: Summary,
    pub log_score: Summary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleFitReport {
    pub realizations: usize,
    pub window: (usize, usize),
    /// Rows: predictor without error correction, theoretical correction, fit.
    pub rows: Vec<ScaleFitRow>,
}

impl ScaleFitReport {
    pub fn row(&self, method: &str) -> Option<&ScaleFitRow> {
        self.rows.iter().find(|r| r.method == method)
    }

    pub fn to_table(&self) -> String {
        let mut out = format!(
            "{:<14} {:>16} {:>16} {:>16}\n",
            "method", "beta", "eta", "log-score"
        );
        let cell = |s: &Summary| format!("({:.3}, {:.3})", s.mean, s.std);
        for r in &self.rows {
            out.push_str(&format!(
                "{:<14} {:>16} {:>16} {:>16}\n",
                r.method,
                cell(&r.beta),
                cell(&r.eta),
                cell(&r.log_score)
            ));
        }
        out
    }
}

/// Binary predictors evaluated on the positions `window` of each realization
/// after ranking with `engine`: nominal scale and advantage, the noise-corrected
/// values, and values fitted to the same window.
pub fn scale_fit(
    sim: &SimConfig,
    engine: &EngineConfig,
    scale: f64,
    realizations: usize,
    window: std::ops::Range<usize>,
) -> Result<ScaleFitReport> {
    if sim.true_model.levels() != 2 || engine.levels() != 2 {
        return Err(AppError::Config("the scale-fit study needs binary outcomes".into()));
    }
    if window.is_empty() || window.end > sim.matches {
        return Err(AppError::Core(gelo::Error::Window(format!(
            "fit window {window:?} outside {} matches",
            sim.matches
        ))));
    }
    if realizations == 0 {
        return Err(AppError::Config("need at least one realization".into()));
    }
    let noise = NoiseModel::from_engine(scale, sim.step_policy.mean(), sim.skill_variance, sim.generator_scale())?;
    let corrected = effective_params(scale, engine.hfa, &noise)?;
    let m = sim.players;
    let per_run = map_replications(sim, realizations, ReplicationOptions::default(), |_, out| {
        let mut state = SkillState::with_skills(
            engine.clone(),
            (0..m).map(|i| (player_id(i), engine.initial_skill)),
        )?;
        let traj = run_matches(&mut state, &out.matches, TrajectoryOptions::diffs_only())?;
        let diffs: Vec<f64> = traj.diffs.iter().map(|d| d.1).collect();
        let obs = Observation::from_matches(&out.matches, &diffs)?;
        let w = &obs[window.clone()];
        let fit = fit_binary(w, scale)?;
        Ok([
            binary_log_score(w, scale, 1.0, engine.hfa)?,
            binary_log_score(w, scale, corrected.beta_err, corrected.hfa)?,
            fit.beta,
            fit.hfa,
            binary_log_score(w, scale, fit.beta, fit.hfa)?,
        ])
    })?;
    let col = |i: usize| -> Summary {
        let v: Vec<f64> = per_run.iter().map(|r| r[i]).collect();
        Summary::of(&v).expect("non-empty ensemble")
    };
    let fixed = |x: f64| Summary { mean: x, std: 0.0 };
    Ok(ScaleFitReport {
        realizations,
        window: (window.start, window.end),
        rows: vec![
            ScaleFitRow {
                method: "no-correction".into(),
                beta: fixed(1.0),
                eta: fixed(engine.hfa),
                log_score: col(0),
            },
            ScaleFitRow {
                method: "theoretical".into(),
                beta: fixed(corrected.beta_err),
                eta: fixed(corrected.hfa),
                log_score: col(1),
            },
            ScaleFitRow {
                method: "data-fit".into(),
                beta: col(2),
                eta: col(3),
                log_score: col(4),
            },
        ],
    })
}
