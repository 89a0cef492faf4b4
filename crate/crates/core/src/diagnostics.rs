//! Closed-form convergence and estimation-noise analysis.
//!
//! Skill estimates produced with step `K` at scale `s` fluctuate around their
//! limit with variance `v̄ ≈ sK/2` and approach it with time constant
//! `τ = 4s/K` matches. Prediction from noisy skills needs an inflated scale
//! `ŝ = s·β_err` and an attenuated home-field advantage `η̂`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::outcome_model::{beta_logistic_to_gaussian, GaussianMatch};
use crate::rating_engine::{MatchRecord, PlayerId, SkillState};

fn positive(x: f64, what: &str) -> Result<f64> {
    if x > 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{what} = {x} must be positive")))
    }
}

fn non_negative(x: f64, what: &str) -> Result<f64> {
    if x >= 0.0 && x.is_finite() {
        Ok(x)
    } else {
        Err(Error::InvalidParameter(format!("{what} = {x} must be non-negative")))
    }
}

/// Stationary variance of the skill estimates, `v̄ = sK/2`.
pub fn asymptotic_variance(scale: f64, step: f64) -> Result<f64> {
    Ok(positive(scale, "scale")? * non_negative(step, "step")? / 2.0)
}

/// Convergence time constant `τ = 4s/K`, in matches played by the player.
pub fn time_constant(scale: f64, step: f64) -> Result<f64> {
    Ok(4.0 * positive(scale, "scale")? / positive(step, "step")?)
}

/// Time constant on a global match clock where each player waits on average
/// `M/2` matches between its own games.
pub fn time_constant_global(scale: f64, step: f64, players: usize) -> Result<f64> {
    if players < 2 {
        return Err(Error::InvalidParameter("need at least two players".into()));
    }
    Ok(time_constant(scale, step)? * players as f64 / 2.0)
}

/// Rule-of-thumb interval `[2τ, 3τ]` after which convergence in mean is declared.
pub fn convergence_window(tau: f64) -> (f64, f64) {
    (2.0 * tau, 3.0 * tau)
}

/// Expected skill after `t` of the player's matches:
/// `e^{-t/τ}(θ₀ − θ∞) + θ∞`.
pub fn expected_trajectory(initial: f64, limit: f64, tau: f64, t: f64) -> f64 {
    (-t / tau).exp() * (initial - limit) + limit
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlayerConvergence {
    pub player_id: PlayerId,
    pub n_matches: u64,
    pub mean_step: f64,
    /// `τ̄_m = 4s/K̄_m`; infinite for players without matches.
    pub tau: f64,
    /// `Λ_m = N_m / τ̄_m`.
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub scale: f64,
    pub players: Vec<PlayerConvergence>,
    /// `v̄ = (1/M) Σ s·K̄_m/2`.
    pub mean_variance: f64,
    pub fraction_lambda_ge_1: f64,
    pub fraction_lambda_ge_2: f64,
}

impl ConvergenceReport {
    fn from_counts(scale: f64, rows: Vec<(PlayerId, u64, f64)>) -> Result<Self> {
        positive(scale, "scale")?;
        if rows.is_empty() {
            return Err(Error::Empty("no players to report on"));
        }
        let players: Vec<_> = rows
            .into_iter()
            .map(|(player_id, n, step_sum)| {
                if n == 0 {
                    PlayerConvergence {
                        player_id,
                        n_matches: 0,
                        mean_step: 0.0,
                        tau: f64::INFINITY,
                        lambda: 0.0,
                    }
                } else {
                    let mean_step = step_sum / n as f64;
                    let tau = 4.0 * scale / mean_step;
                    PlayerConvergence {
                        player_id,
                        n_matches: n,
                        mean_step,
                        tau,
                        lambda: n as f64 / tau,
                    }
                }
            })
            .collect();
        let m = players.len() as f64;
        let mean_variance = players.iter().map(|p| scale * p.mean_step / 2.0).sum::<f64>() / m;
        let frac = |min: f64| players.iter().filter(|p| p.lambda >= min).count() as f64 / m;
        Ok(Self {
            scale,
            mean_variance,
            fraction_lambda_ge_1: frac(1.0),
            fraction_lambda_ge_2: frac(2.0),
            players,
        })
    }

    /// Empirical CDF of `Λ_m`: `(Λ, fraction of players with Λ_m ≤ Λ)` at
    /// each distinct value.
    pub fn lambda_distribution(&self) -> Vec<(f64, f64)> {
        let mut lambdas: Vec<f64> = self.players.iter().map(|p| p.lambda).collect();
        lambdas.sort_by(f64::total_cmp);
        let m = lambdas.len() as f64;
        let mut out: Vec<(f64, f64)> = Vec::new();
        for (i, l) in lambdas.iter().enumerate() {
            let frac = (i + 1) as f64 / m;
            match out.last_mut() {
                Some(last) if last.0 == *l => last.1 = frac,
                _ => out.push((*l, frac)),
            }
        }
        out
    }

    /// Share of players whose `Λ_m` is below `lambda`.
    pub fn fraction_below(&self, lambda: f64) -> f64 {
        self.players.iter().filter(|p| p.lambda < lambda).count() as f64 / self.players.len() as f64
    }
}

/// Convergence report from the counters of a rating state.
pub fn convergence_report(state: &SkillState, scale: f64) -> Result<ConvergenceReport> {
    let rows = state
        .players()
        .iter()
        .zip(state.match_counts())
        .zip(state.step_sums())
        .map(|((id, &n), &k)| (id.clone(), n, k))
        .collect();
    ConvergenceReport::from_counts(scale, rows)
}

/// Convergence report computed directly from a match log.
pub fn convergence_report_from_matches(matches: &[MatchRecord], scale: f64) -> Result<ConvergenceReport> {
    if matches.is_empty() {
        return Err(Error::Empty("match log"));
    }
    let mut order: Vec<PlayerId> = Vec::new();
    let mut acc: std::collections::HashMap<PlayerId, (u64, f64)> = Default::default();
    for m in matches {
        for p in [&m.home, &m.away] {
            let e = acc.entry(p.clone()).or_insert_with(|| {
                order.push(p.clone());
                (0, 0.0)
            });
            e.0 += 1;
            e.1 += m.step;
        }
    }
    let rows = order
        .into_iter()
        .map(|p| {
            let (n, k) = acc[&p];
            (p, n, k)
        })
        .collect();
    ConvergenceReport::from_counts(scale, rows)
}

/// Sliding-window variance and mean of the last `window` values of a skill
/// path, with `1/W` normalization. Returns `(variance, mean)`.
pub fn temporal_variance(path: &[f64], window: usize) -> Result<(f64, f64)> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    if path.len() < window {
        return Err(Error::Window(format!(
            "{} samples, window {window}",
            path.len()
        )));
    }
    let tail = &path[path.len() - window..];
    let w = window as f64;
    let mean = tail.iter().sum::<f64>() / w;
    let var = tail.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / w;
    Ok((var, mean))
}

/// `Pr{z* > 0 | z} = Φ(z/√(2v̄))`.
pub fn superiority_probability(diff: f64, mean_variance: f64) -> Result<f64> {
    non_negative(mean_variance, "estimation variance")?;
    if mean_variance == 0.0 {
        return Ok(if diff > 0.0 {
            1.0
        } else if diff < 0.0 {
            0.0
        } else {
            0.5
        });
    }
    Ok(math::norm_cdf(diff / (2.0 * mean_variance).sqrt()))
}

/// `a = 1 + v̄/v_θ`.
pub fn noise_ratio(mean_variance: f64, skill_variance: f64) -> Result<f64> {
    Ok(1.0 + non_negative(mean_variance, "estimation variance")? / positive(skill_variance, "skill variance")?)
}

/// Estimation noise relative to the true-skill dispersion, both in squared
/// skill points at the engine scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// `v̄`
    pub mean_variance: f64,
    /// `v_θ`, per-player true-skill variance.
    pub skill_variance: f64,
    /// Convention for `β_{L→Φ}` inside `β_err`.
    #[serde(default)]
    pub gaussian_match: GaussianMatch,
}

impl NoiseModel {
    pub fn new(mean_variance: f64, skill_variance: f64) -> Result<Self> {
        non_negative(mean_variance, "estimation variance")?;
        positive(skill_variance, "skill variance")?;
        Ok(Self {
            mean_variance,
            skill_variance,
            gaussian_match: GaussianMatch::Derivative,
        })
    }

    /// Noise of an engine with step `K` at scale `s`, with true skills drawn at
    /// generator scale `s*` with variance `v`; rescaled to `v·(s/s*)²`.
    pub fn from_engine(scale: f64, step: f64, generator_variance: f64, generator_scale: f64) -> Result<Self> {
        let ratio = scale / positive(generator_scale, "generator scale")?;
        Self::new(asymptotic_variance(scale, step)?, generator_variance * ratio * ratio)
    }

    pub fn with_gaussian_match(mut self, m: GaussianMatch) -> Self {
        self.gaussian_match = m;
        self
    }

    pub fn ratio(&self) -> f64 {
        1.0 + self.mean_variance / self.skill_variance
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EffectiveParams {
    /// `ŝ = s·β_err`
    pub scale: f64,
    /// `η̂ = η·a/β_err`
    pub hfa: f64,
    pub beta_err: f64,
}

/// Noise-corrected scale and HFA for prediction from estimated skills:
/// `β_err = a·√(1 + 2v̄/(a(s·β_{L→Φ})²))`.
pub fn effective_params(scale: f64, hfa: f64, noise: &NoiseModel) -> Result<EffectiveParams> {
    positive(scale, "scale")?;
    let a = noise.ratio();
    let b = beta_logistic_to_gaussian(noise.gaussian_match).factor;
    let beta_err = a * (1.0 + 2.0 * noise.mean_variance / (a * (scale * b).powi(2))).sqrt();
    Ok(EffectiveParams {
        scale: scale * beta_err,
        hfa: hfa * a / beta_err,
        beta_err,
    })
}

/// Gaussian `N(mean, variance)`; a zero variance is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gaussian {
    pub mean: f64,
    pub variance: f64,
}

impl Gaussian {
    pub fn density(&self, x: f64) -> f64 {
        math::gauss_pdf(x, self.mean, self.variance)
    }
}

/// Posterior of the true difference given the estimated one:
/// `z* | z ~ N(z/a, 2v̄/a)`.
pub fn posterior_true_diff(diff: f64, noise: &NoiseModel) -> Gaussian {
    let a = noise.ratio();
    Gaussian {
        mean: diff / a,
        variance: 2.0 * noise.mean_variance / a,
    }
}

/// `∫ Φ((x+z)/b) N(x; y, q²) dx = Φ((y+z)/√(b²+q²))`.
pub fn gaussian_cdf_expectation(b: f64, y: f64, z: f64, q: f64) -> Result<f64> {
    positive(b, "b")?;
    if !q.is_finite() || !y.is_finite() || !z.is_finite() {
        return Err(Error::NonFinite("gaussian_cdf_expectation argument"));
    }
    Ok(math::norm_cdf((y + z) / (b * b + q * q).sqrt()))
}

/// Win probability from a noisy skill difference, `L(z/ŝ + η̂)`.
pub fn marginalized_win_prob(diff: f64, scale: f64, hfa: f64, noise: &NoiseModel) -> Result<f64> {
    let eff = effective_params(scale, hfa, noise)?;
    Ok(math::sigmoid(diff / eff.scale + eff.hfa))
}

/// Reference path: `∫ L(z*/s + η) p(z* | z) dz*` by adaptive quadrature.
pub fn marginalized_win_prob_exact(diff: f64, scale: f64, hfa: f64, noise: &NoiseModel) -> Result<f64> {
    positive(scale, "scale")?;
    let post = posterior_true_diff(diff, noise);
    Ok(math::gaussian_expectation(
        |x| math::sigmoid(x / scale + hfa),
        post.mean,
        post.variance,
        1e-12,
    ))
}
