//! Synthetic tournaments with known skills.
//!
//! True skills are Gaussian at a generator scale `s*`. Matches are scheduled
//! at random and outcomes are drawn from an AC model with the generator's
//! `(α*, η*)`. The rating engine only ever sees the match log; `s*` and `θ*`
//! are kept for ground-truth comparisons.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::outcome_model::{AcParams, OutcomeScale};
use crate::rating_engine::{
    run_matches, EngineConfig, MatchRecord, PlayerId, SkillState, Trajectory, TrajectoryOptions,
};

/// Adaptation step assigned to each generated match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum StepPolicy {
    Constant { step: f64 },
    /// Uniform draw from a finite set, independently per match.
    UniformChoice { steps: Vec<f64> },
    /// Uniform draw from a finite set, once per realization and then held
    /// for all of its matches.
    PerRealization { steps: Vec<f64> },
}

impl StepPolicy {
    pub fn constant(step: f64) -> Self {
        Self::Constant { step }
    }

    pub fn uniform_choice(steps: Vec<f64>) -> Self {
        Self::UniformChoice { steps }
    }

    pub fn per_realization(steps: Vec<f64>) -> Self {
        Self::PerRealization { steps }
    }

    pub fn mean(&self) -> f64 {
        match self {
            Self::Constant { step } => *step,
            Self::UniformChoice { steps } | Self::PerRealization { steps } => {
                steps.iter().sum::<f64>() / steps.len() as f64
            }
        }
    }

    fn validate(&self) -> Result<()> {
        let steps: &[f64] = match self {
            Self::Constant { step } => std::slice::from_ref(step),
            Self::UniformChoice { steps } | Self::PerRealization { steps } => steps,
        };
        if steps.is_empty() || steps.iter().any(|k| !(*k > 0.0) || !k.is_finite()) {
            return Err(Error::InvalidParameter("steps must be positive".into()));
        }
        Ok(())
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Constant { step } => *step,
            Self::UniformChoice { steps } | Self::PerRealization { steps } => {
                steps[rng.random_range(0..steps.len())]
            }
        }
    }

    /// Policy in force for one realization.
    fn realize<R: Rng>(&self, rng: &mut R) -> Self {
        match self {
            Self::PerRealization { .. } => Self::Constant { step: self.draw(rng) },
            other => other.clone(),
        }
    }
}

/// How opponents are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Pairing {
    /// Independent uniform ordered pair `(i, j)`, `i ≠ j`, for every match.
    #[default]
    RandomPair,
    /// Random perfect matchings: every player meets a random opponent once per
    /// round (one player sits out when `M` is odd).
    RandomRound,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub players: usize,
    /// Number of matches `T`.
    pub matches: usize,
    /// Variance `v_θ*` of the true skills at the generator scale.
    pub skill_variance: f64,
    /// Generator model: scale `s*`, advantage `η*`, `α*` and scores.
    pub true_model: AcParams,
    pub step_policy: StepPolicy,
    #[serde(default)]
    pub pairing: Pairing,
    /// Share of matches played at the home player's venue.
    pub home_fraction: f64,
    /// Rescale the drawn skills to sample mean 0 and variance `v_θ*` exactly.
    #[serde(default)]
    pub standardize_skills: bool,
    pub seed: u64,
}

impl SimConfig {
    /// Binary convergence illustration: 30 players, `v_θ* = 0.5`, `η* = 0.35`
    /// on every match, 1000 rounds of random matchings.
    pub fn example1(step_policy: StepPolicy) -> Self {
        Self {
            players: 30,
            matches: 1000 * 15,
            skill_variance: 0.5,
            true_model: AcParams::logistic(1.0, 0.35).expect("valid preset"),
            step_policy,
            pairing: Pairing::RandomRound,
            home_fraction: 1.0,
            standardize_skills: true,
            seed: 1,
        }
    }

    /// Ternary identification setup: `α₁* = −0.4`, `η* = 0.35`, 12 000
    /// random pairs with home advantage on every match.
    pub fn example4(step: f64) -> Self {
        let model = AcParams::symmetric(
            &[-0.4],
            OutcomeScale::uniform(3).expect("three levels"),
            1.0,
            0.35,
        )
        .expect("valid preset");
        Self {
            players: 30,
            matches: 12_000,
            skill_variance: 0.5,
            true_model: model,
            step_policy: StepPolicy::constant(step),
            pairing: Pairing::RandomPair,
            home_fraction: 1.0,
            standardize_skills: true,
            seed: 1,
        }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn generator_scale(&self) -> f64 {
        self.true_model.scale()
    }

    pub fn validate(&self) -> Result<()> {
        if self.players < 2 {
            return Err(Error::InvalidParameter("need at least two players".into()));
        }
        if self.matches == 0 {
            return Err(Error::InvalidParameter("need at least one match".into()));
        }
        if !(self.skill_variance >= 0.0) || !self.skill_variance.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "skill variance {}",
                self.skill_variance
            )));
        }
        if !(0.0..=1.0).contains(&self.home_fraction) {
            return Err(Error::InvalidParameter(format!(
                "home fraction {}",
                self.home_fraction
            )));
        }
        self.step_policy.validate()
    }
}

/// Generated data for one realization.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutput {
    pub skills: Vec<f64>,
    pub matches: Vec<MatchRecord>,
    /// `z*_t = θ*_home − θ*_away` per match.
    pub true_diffs: Vec<f64>,
}

/// Identifier of generated player `i`.
pub fn player_id(i: usize) -> PlayerId {
    PlayerId(format!("p{i:03}"))
}

/// Generator for stream `stream` of `seed`; streams are independent.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

const SKILL_STREAM: u64 = 0;

/// `M` zero-mean Gaussian skills with variance `v_θ*`, from the skill stream
/// of the configured seed.
pub fn generate_skills(config: &SimConfig) -> Result<Vec<f64>> {
    config.validate()?;
    let mut rng = stream_rng(config.seed, SKILL_STREAM);
    let v = config.skill_variance;
    if v == 0.0 {
        return Ok(vec![0.0; config.players]);
    }
    let normal = Normal::new(0.0, v.sqrt()).map_err(|e| Error::InvalidParameter(e.to_string()))?;
    let mut skills: Vec<f64> = (0..config.players).map(|_| normal.sample(&mut rng)).collect();
    if config.standardize_skills {
        let m = skills.len() as f64;
        let mean = skills.iter().sum::<f64>() / m;
        let var = skills.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / m;
        let k = (v / var).sqrt();
        for x in skills.iter_mut() {
            *x = (*x - mean) * k;
        }
    }
    Ok(skills)
}

/// Uniform ordered pair of distinct players.
pub fn schedule_pair<R: Rng>(players: usize, rng: &mut R) -> (usize, usize) {
    let i = rng.random_range(0..players);
    let mut j = rng.random_range(0..players - 1);
    if j >= i {
        j += 1;
    }
    (i, j)
}

/// Random perfect matching of `0..players` as ordered pairs.
pub fn schedule_round<R: Rng>(players: usize, rng: &mut R) -> Vec<(usize, usize)> {
    let mut order: Vec<usize> = (0..players).collect();
    order.shuffle(rng);
    order.chunks_exact(2).map(|c| (c[0], c[1])).collect()
}

/// Outcome index drawn from the generator model at difference `z*`.
pub fn sample_outcome<R: Rng>(true_diff: f64, home_venue: bool, model: &AcParams, rng: &mut R) -> usize {
    let u = true_diff / model.scale() + if home_venue { model.hfa() } else { 0.0 };
    let r: f64 = rng.random();
    let mut acc = 0.0;
    let l = model.levels();
    for y in 0..l - 1 {
        acc += model.prob_u(y, u);
        if r < acc {
            return y;
        }
    }
    l - 1
}

/// Match log for realization `stream` with the given true skills.
pub fn simulate_with_skills(config: &SimConfig, skills: &[f64], stream: u64) -> Result<SimOutput> {
    config.validate()?;
    if skills.len() != config.players {
        return Err(Error::InvalidParameter(format!(
            "{} skills for {} players",
            skills.len(),
            config.players
        )));
    }
    let mut rng = stream_rng(config.seed, stream);
    let ids: Vec<PlayerId> = (0..config.players).map(player_id).collect();
    let mut matches = Vec::with_capacity(config.matches);
    let mut true_diffs = Vec::with_capacity(config.matches);
    let mut round: Vec<(usize, usize)> = Vec::new();
    let policy = config.step_policy.realize(&mut rng);
    for t in 0..config.matches {
        let (i, j) = match config.pairing {
            Pairing::RandomPair => schedule_pair(config.players, &mut rng),
            Pairing::RandomRound => {
                if round.is_empty() {
                    round = schedule_round(config.players, &mut rng);
                    round.reverse();
                }
                round.pop().expect("non-empty round")
            }
        };
        let home_venue = config.home_fraction >= 1.0
            || (config.home_fraction > 0.0 && rng.random::<f64>() < config.home_fraction);
        let z = skills[i] - skills[j];
        let outcome = sample_outcome(z, home_venue, &config.true_model, &mut rng);
        let step = policy.draw(&mut rng);
        matches.push(MatchRecord::new(t, ids[i].clone(), ids[j].clone(), outcome, home_venue, step));
        true_diffs.push(z);
    }
    Ok(SimOutput {
        skills: skills.to_vec(),
        matches,
        true_diffs,
    })
}

/// One realization: skills from the skill stream, matches from stream 1.
pub fn simulate(config: &SimConfig) -> Result<SimOutput> {
    let skills = generate_skills(config)?;
    simulate_with_skills(config, &skills, 1)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct ReplicationOptions {
    /// Draw fresh skills for each realization instead of sharing one draw.
    pub redraw_skills: bool,
}

/// Runs `f` on `J` independent realizations in parallel. Realization `j` uses
/// match stream `j + 1`; with `redraw_skills` its skills come from seed
/// `seed + j`. Results are returned in realization order.
pub fn map_replications<R, F>(
    config: &SimConfig,
    realizations: usize,
    options: ReplicationOptions,
    f: F,
) -> Result<Vec<R>>
where
    R: Send,
    F: Fn(usize, SimOutput) -> Result<R> + Sync,
{
    config.validate()?;
    let shared = generate_skills(config)?;
    (0..realizations)
        .into_par_iter()
        .map(|j| {
            let skills = if options.redraw_skills {
                let c = config.clone().with_seed(config.seed.wrapping_add(j as u64));
                generate_skills(&c)?
            } else {
                shared.clone()
            };
            let out = simulate_with_skills(config, &skills, j as u64 + 1)?;
            f(j, out)
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct Replication {
    pub output: SimOutput,
    pub trajectory: Trajectory,
}

/// Simulates and ranks `J` realizations with a fresh engine each.
pub fn run_replications(
    config: &SimConfig,
    engine: &EngineConfig,
    realizations: usize,
    options: ReplicationOptions,
    trajectory: TrajectoryOptions,
) -> Result<Vec<Replication>> {
    map_replications(config, realizations, options, |_, output| {
        let ids: Vec<PlayerId> = (0..config.players).map(player_id).collect();
        let mut state =
            SkillState::with_skills(engine.clone(), ids.into_iter().map(|id| (id, engine.initial_skill)))?;
        let trajectory = run_matches(&mut state, &output.matches, trajectory)?;
        Ok(Replication { output, trajectory })
    })
}

/// Across-realization mean and variance (`1/J`) of equally shaped samples.
#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleStats {
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
    pub count: usize,
}

impl EnsembleStats {
    pub fn from_samples<'a, I>(samples: I) -> Result<Self>
    where
        I: IntoIterator<Item = &'a [f64]>,
    {
        let mut mean: Vec<f64> = Vec::new();
        let mut m2: Vec<f64> = Vec::new();
        let mut count = 0usize;
        for s in samples {
            if count == 0 {
                mean = vec![0.0; s.len()];
                m2 = vec![0.0; s.len()];
            } else if s.len() != mean.len() {
                return Err(Error::InvalidParameter("ragged ensemble samples".into()));
            }
            count += 1;
            for ((m, q), x) in mean.iter_mut().zip(m2.iter_mut()).zip(s) {
                let d = x - *m;
                *m += d / count as f64;
                *q += d * (x - *m);
            }
        }
        if count == 0 {
            return Err(Error::Empty("ensemble"));
        }
        let variance = m2.into_iter().map(|q| q / count as f64).collect();
        Ok(Self {
            mean,
            variance,
            count,
        })
    }
}
