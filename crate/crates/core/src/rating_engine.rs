//! Sequential online rating.
//!
//! Both supported algorithms move the home and away skills by the same
//! amount in opposite directions,
//!
//! ```text
//! θ_home += K·(δ_y − G(z/s + η·h)),   θ_away −= K·(δ_y − G(z/s + η·h)),
//! ```
//!
//! and differ only in the expected score `G`: a fixed function for Elo, the
//! AC model expectation for G-Elo.

use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::outcome_model::{AcParams, OutcomeScale};

/// Player identifier as it appears in match data.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PlayerId(pub String);

impl PlayerId {
    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for PlayerId {
    fn from(s: &str) -> Self {
        PlayerId(s.to_owned())
    }
}

impl From<String> for PlayerId {
    fn from(s: String) -> Self {
        PlayerId(s)
    }
}

/// One observed match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchRecord {
    /// Sequence index; strictly increasing within a match log.
    pub t: usize,
    pub home: PlayerId,
    pub away: PlayerId,
    /// Outcome index in `0..L`, from the home player's perspective.
    pub outcome: usize,
    /// `h = 1`: played at the home player's venue.
    pub home_venue: bool,
    /// Adaptation step `K_t` in skill points.
    pub step: f64,
    /// Calendar date (ISO-8601), metadata only.
    pub timestamp: Option<String>,
}

impl MatchRecord {
    pub fn new(
        t: usize,
        home: impl Into<PlayerId>,
        away: impl Into<PlayerId>,
        outcome: usize,
        home_venue: bool,
        step: f64,
    ) -> Self {
        Self {
            t,
            home: home.into(),
            away: away.into(),
            outcome,
            home_venue,
            step,
            timestamp: None,
        }
    }

    /// Checks `home ≠ away`, `K > 0` and the outcome range.
    pub fn validate(&self, levels: usize) -> Result<()> {
        if self.home == self.away {
            return Err(Error::InvalidParameter(format!(
                "player {} cannot play itself",
                self.home
            )));
        }
        if !(self.step > 0.0) || !self.step.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "step K = {} must be positive",
                self.step
            )));
        }
        if self.outcome >= levels {
            return Err(Error::OutcomeIndex {
                index: self.outcome,
                levels,
            });
        }
        Ok(())
    }
}

/// Expected-score function of the practitioner's Elo update.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum EloScore {
    Logistic,
    GaussianCdf,
    GeneralizedLogistic { base: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "algorithm", rename_all = "kebab-case")]
pub enum Algorithm {
    Elo { score: EloScore },
    /// G-Elo: stochastic-gradient ML update of the AC model with these `α`.
    Gelo { alpha: Vec<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub scale: f64,
    pub hfa: f64,
    pub scores: OutcomeScale,
    pub algorithm: Algorithm,
    #[serde(default)]
    pub initial_skill: f64,
}

impl EngineConfig {
    /// Elo with the canonical logistic expected score.
    pub fn elo(scale: f64, hfa: f64, scores: OutcomeScale) -> Self {
        Self {
            scale,
            hfa,
            scores,
            algorithm: Algorithm::Elo {
                score: EloScore::Logistic,
            },
            initial_skill: 0.0,
        }
    }

    pub fn elo_with(scale: f64, hfa: f64, scores: OutcomeScale, score: EloScore) -> Self {
        Self {
            algorithm: Algorithm::Elo { score },
            ..Self::elo(scale, hfa, scores)
        }
    }

    /// G-Elo driven by the given AC model (its scale, HFA and scores).
    pub fn gelo(params: &AcParams) -> Self {
        if !params.is_symmetric() {
            log::warn!("G-Elo with asymmetric alpha: outcome symmetry no longer holds");
        }
        Self {
            scale: params.scale(),
            hfa: params.hfa(),
            scores: params.scores().clone(),
            algorithm: Algorithm::Gelo {
                alpha: params.alpha().to_vec(),
            },
            initial_skill: 0.0,
        }
    }

    pub fn with_initial_skill(mut self, skill: f64) -> Self {
        self.initial_skill = skill;
        self
    }

    pub fn levels(&self) -> usize {
        self.scores.levels()
    }

    fn kernel(&self) -> Result<Kernel> {
        if !(self.scale > 0.0) || !self.scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale {}", self.scale)));
        }
        if !self.hfa.is_finite() || !self.initial_skill.is_finite() {
            return Err(Error::NonFinite("engine configuration"));
        }
        Ok(match &self.algorithm {
            Algorithm::Elo { score } => match *score {
                EloScore::Logistic => Kernel::Logistic,
                EloScore::GaussianCdf => Kernel::Gaussian,
                EloScore::GeneralizedLogistic { base } => {
                    if !(base > 0.0) || base == 1.0 || !base.is_finite() {
                        return Err(Error::InvalidParameter(format!("exponent base {base}")));
                    }
                    Kernel::BaseLogistic(base.ln())
                }
            },
            Algorithm::Gelo { alpha } => Kernel::Ac(AcParams::new(
                alpha.clone(),
                self.scores.clone(),
                self.scale,
                self.hfa,
            )?),
        })
    }
}

#[derive(Debug, Clone)]
enum Kernel {
    Logistic,
    Gaussian,
    BaseLogistic(f64),
    Ac(AcParams),
}

impl Kernel {
    #[inline]
    fn expected(&self, u: f64) -> f64 {
        match self {
            Kernel::Logistic => math::sigmoid(u),
            Kernel::Gaussian => math::norm_cdf(u),
            Kernel::BaseLogistic(ln_a) => math::sigmoid(u * ln_a),
            Kernel::Ac(p) => p.expected_score_u(u),
        }
    }
}

/// What a single update did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AppliedUpdate {
    /// Pre-match skill difference `z_t`.
    pub diff: f64,
    pub expected: f64,
    /// `δ_y − G`
    pub residual: f64,
    /// Amount added to the home skill (and removed from the away skill).
    pub change: f64,
}

/// The evolving rating vector with per-player bookkeeping.
#[derive(Debug, Clone)]
pub struct SkillState {
    config: EngineConfig,
    kernel: Kernel,
    index: HashMap<PlayerId, usize>,
    ids: Vec<PlayerId>,
    skills: Vec<f64>,
    counts: Vec<u64>,
    step_sums: Vec<f64>,
    last_t: Option<usize>,
}

impl SkillState {
    pub fn new(config: EngineConfig) -> Result<Self> {
        let kernel = config.kernel()?;
        Ok(Self {
            config,
            kernel,
            index: HashMap::new(),
            ids: Vec::new(),
            skills: Vec::new(),
            counts: Vec::new(),
            step_sums: Vec::new(),
            last_t: None,
        })
    }

    /// State with carried-over skills.
    pub fn with_skills<I>(config: EngineConfig, skills: I) -> Result<Self>
    where
        I: IntoIterator<Item = (PlayerId, f64)>,
    {
        let mut state = Self::new(config)?;
        for (id, skill) in skills {
            if !skill.is_finite() {
                return Err(Error::NonFinite("initial skill"));
            }
            let i = state.register(&id);
            state.skills[i] = skill;
        }
        Ok(state)
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Index of `id`, registering it at the initial skill if unknown.
    pub fn register(&mut self, id: &PlayerId) -> usize {
        if let Some(&i) = self.index.get(id) {
            return i;
        }
        let i = self.ids.len();
        self.index.insert(id.clone(), i);
        self.ids.push(id.clone());
        self.skills.push(self.config.initial_skill);
        self.counts.push(0);
        self.step_sums.push(0.0);
        i
    }

    pub fn players(&self) -> &[PlayerId] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Skills in registration order.
    pub fn skills(&self) -> &[f64] {
        &self.skills
    }

    pub fn match_counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn step_sums(&self) -> &[f64] {
        &self.step_sums
    }

    pub fn skill(&self, id: &PlayerId) -> Option<f64> {
        self.index.get(id).map(|&i| self.skills[i])
    }

    fn skill_or_initial(&self, id: &PlayerId) -> f64 {
        self.skill(id).unwrap_or(self.config.initial_skill)
    }

    /// `z = θ_home − θ_away`; unknown players count at the initial skill.
    pub fn skill_diff(&self, home: &PlayerId, away: &PlayerId) -> f64 {
        self.skill_or_initial(home) - self.skill_or_initial(away)
    }

    pub fn total_skill(&self) -> f64 {
        self.skills.iter().sum()
    }

    /// Expected score `G(z/s + η·h)` under the configured algorithm.
    pub fn expected_score(&self, diff: f64, home_venue: bool) -> f64 {
        let u = diff / self.config.scale + if home_venue { self.config.hfa } else { 0.0 };
        self.kernel.expected(u)
    }

    /// Applies one match. Rejects an invalid outcome, `K ≤ 0`, self-play and
    /// non-increasing sequence indices.
    pub fn update(&mut self, record: &MatchRecord) -> Result<AppliedUpdate> {
        record.validate(self.config.levels())?;
        if let Some(prev) = self.last_t {
            if record.t <= prev {
                return Err(Error::OutOfOrder {
                    t: record.t,
                    previous: prev,
                });
            }
        }
        let i = self.register(&record.home);
        let j = self.register(&record.away);
        let applied = self.update_indexed(i, j, record.outcome, record.home_venue, record.step);
        self.last_t = Some(record.t);
        Ok(applied)
    }

    /// Update on registered indices without validation or ordering checks.
    pub fn update_indexed(
        &mut self,
        home: usize,
        away: usize,
        outcome: usize,
        home_venue: bool,
        step: f64,
    ) -> AppliedUpdate {
        let diff = self.skills[home] - self.skills[away];
        let expected = self.expected_score(diff, home_venue);
        let residual = self.config.scores.scores()[outcome] - expected;
        let change = step * residual;
        self.skills[home] += change;
        self.skills[away] -= change;
        self.counts[home] += 1;
        self.counts[away] += 1;
        self.step_sums[home] += step;
        self.step_sums[away] += step;
        AppliedUpdate {
            diff,
            expected,
            residual,
            change,
        }
    }

    /// Immutable per-player summary.
    pub fn snapshot(&self) -> SkillSnapshot {
        SkillSnapshot {
            entries: self
                .ids
                .iter()
                .enumerate()
                .map(|(i, id)| PlayerEntry {
                    player_id: id.clone(),
                    skill: self.skills[i],
                    n_matches: self.counts[i],
                    mean_step: if self.counts[i] == 0 {
                        0.0
                    } else {
                        self.step_sums[i] / self.counts[i] as f64
                    },
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerEntry {
    pub player_id: PlayerId,
    pub skill: f64,
    pub n_matches: u64,
    pub mean_step: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SkillSnapshot {
    pub entries: Vec<PlayerEntry>,
}

/// What [`run_matches`] records.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrajectoryOptions {
    /// Record a skill snapshot after every `stride` matches; `None` disables.
    pub stride: Option<usize>,
}

impl Default for TrajectoryOptions {
    fn default() -> Self {
        Self { stride: Some(1) }
    }
}

impl TrajectoryOptions {
    pub fn diffs_only() -> Self {
        Self { stride: None }
    }
}

/// Skills of all players registered at time `t`, after match `t` was applied.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryPoint {
    pub t: usize,
    pub skills: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    /// `(t, z_t)` with `z_t` taken before the update.
    pub diffs: Vec<(usize, f64)>,
    pub points: Vec<TrajectoryPoint>,
    /// Player ids indexing `points[..].skills`.
    pub players: Vec<PlayerId>,
}

impl Trajectory {
    /// Skill path of one player across recorded points (missing before registration).
    pub fn player_path(&self, player: &PlayerId) -> Vec<(usize, f64)> {
        let Some(i) = self.players.iter().position(|p| p == player) else {
            return Vec::new();
        };
        self.points
            .iter()
            .filter_map(|pt| pt.skills.get(i).map(|&s| (pt.t, s)))
            .collect()
    }
}

/// Applies `matches` in order, recording pre-update differences and strided
/// snapshots.
pub fn run_matches(
    state: &mut SkillState,
    matches: &[MatchRecord],
    options: TrajectoryOptions,
) -> Result<Trajectory> {
    let mut traj = Trajectory {
        diffs: Vec::with_capacity(matches.len()),
        ..Default::default()
    };
    for (n, record) in matches.iter().enumerate() {
        let applied = state.update(record).map_err(|e| Error::AtMatch {
            index: n,
            source: Box::new(e),
        })?;
        traj.diffs.push((record.t, applied.diff));
        if let Some(stride) = options.stride {
            if stride > 0 && (n + 1) % stride == 0 {
                traj.points.push(TrajectoryPoint {
                    t: record.t,
                    skills: state.skills().to_vec(),
                });
            }
        }
    }
    traj.players = state.players().to_vec();
    Ok(traj)
}
