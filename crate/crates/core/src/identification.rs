//! Identification of the prediction model from outcomes and skill differences.
//!
//! The ranking algorithm and the prediction model are decoupled: skill
//! differences `z_t` produced by any rating engine are treated as fixed
//! inputs and the AC model parameters `(α̂, η̂, β̂)` are fitted to the observed
//! outcomes. Closed forms give a cheap warm start; a Newton ascent on the
//! concave log-likelihood in `(γ = 1/β, η, α)` gives the batch fit; a
//! mini-batch gradient rule tracks `γ` online.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;
use crate::outcome_model::{
    beta_ac_to_logistic, expand_symmetric_alpha, free_alpha_count, probs_at, AcParams,
    OutcomeScale,
};
use crate::rating_engine::MatchRecord;

/// Default additive smoothing, in counts per outcome cell.
pub const DEFAULT_SMOOTHING: f64 = 0.5;

/// One training or test sample: skill difference, outcome and venue.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub diff: f64,
    pub outcome: usize,
    pub home_venue: bool,
}

impl Observation {
    pub fn new(diff: f64, outcome: usize, home_venue: bool) -> Self {
        Self {
            diff,
            outcome,
            home_venue,
        }
    }

    /// Pairs match records with their pre-match skill differences.
    pub fn from_matches(matches: &[MatchRecord], diffs: &[f64]) -> Result<Vec<Self>> {
        if matches.len() != diffs.len() {
            return Err(Error::InvalidParameter(format!(
                "{} matches but {} skill differences",
                matches.len(),
                diffs.len()
            )));
        }
        Ok(matches
            .iter()
            .zip(diffs)
            .map(|(m, &z)| Self::new(z, m.outcome, m.home_venue))
            .collect())
    }
}

fn check_observations(samples: &[Observation], levels: usize) -> Result<()> {
    if samples.is_empty() {
        return Err(Error::Empty("observations"));
    }
    for (i, s) in samples.iter().enumerate() {
        if s.outcome >= levels {
            return Err(Error::AtMatch {
                index: i,
                source: Box::new(Error::OutcomeIndex {
                    index: s.outcome,
                    levels,
                }),
            });
        }
        if !s.diff.is_finite() {
            return Err(Error::AtMatch {
                index: i,
                source: Box::new(Error::NonFinite("skill difference")),
            });
        }
    }
    Ok(())
}

/// Outcome frequencies split by venue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeFrequencies {
    /// `P̄_y`: symmetrized neutral frequencies reweighted with the home-venue ones.
    pub overall: Vec<f64>,
    /// `P̄_{y,neut}` after symmetrization; `None` without neutral matches.
    pub neutral: Option<Vec<f64>>,
    /// `P̄_{y,hfa}`; `None` without home-venue matches.
    pub home: Option<Vec<f64>>,
    /// `P̄_hfa`, share of home-venue matches.
    pub home_fraction: f64,
    /// `δ̄_hfa`, mean home score on home-venue matches.
    pub mean_home_score: Option<f64>,
    pub neutral_count: usize,
    pub home_count: usize,
}

/// Venue-split outcome frequencies with `smoothing` pseudo-counts per cell.
pub fn outcome_frequencies(
    samples: &[Observation],
    scores: &OutcomeScale,
    smoothing: f64,
) -> Result<OutcomeFrequencies> {
    let l = scores.levels();
    check_observations(samples, l)?;
    if !(smoothing >= 0.0) || !smoothing.is_finite() {
        return Err(Error::InvalidParameter(format!("smoothing {smoothing}")));
    }
    let mut neutral = vec![0.0; l];
    let mut home = vec![0.0; l];
    for s in samples {
        if s.home_venue {
            home[s.outcome] += 1.0;
        } else {
            neutral[s.outcome] += 1.0;
        }
    }
    let neutral_count = samples.iter().filter(|s| !s.home_venue).count();
    let home_count = samples.len() - neutral_count;
    let normalize = |counts: &[f64], n: usize| -> Option<Vec<f64>> {
        (n > 0).then(|| {
            let total = n as f64 + smoothing * l as f64;
            counts.iter().map(|c| (c + smoothing) / total).collect()
        })
    };
    let neutral = normalize(&neutral, neutral_count)
        .map(|p| (0..l).map(|y| 0.5 * (p[y] + p[l - 1 - y])).collect::<Vec<f64>>());
    let home = normalize(&home, home_count);
    let home_fraction = home_count as f64 / samples.len() as f64;
    let overall = match (&neutral, &home) {
        (Some(n), Some(h)) => n
            .iter()
            .zip(h)
            .map(|(pn, ph)| (1.0 - home_fraction) * pn + home_fraction * ph)
            .collect(),
        (Some(n), None) => n.clone(),
        (None, Some(h)) => h.clone(),
        (None, None) => unreachable!("non-empty sample set"),
    };
    let mean_home_score = home
        .as_ref()
        .map(|h| h.iter().zip(scores.scores()).map(|(p, d)| p * d).sum());
    Ok(OutcomeFrequencies {
        overall,
        neutral,
        home,
        home_fraction,
        mean_home_score,
        neutral_count,
        home_count,
    })
}

/// Closed-form symmetric `α̂_y = ½ log(P̄_y P̄_{L-1-y} / (P̄_0 P̄_{L-1}))`.
pub fn simple_alpha(freqs: &OutcomeFrequencies) -> Result<Vec<f64>> {
    let p = &freqs.overall;
    let l = p.len();
    if l < 2 {
        return Err(Error::InvalidParameter("need at least two outcome levels".into()));
    }
    if !(p[0] > 0.0 && p[l - 1] > 0.0) {
        return Err(Error::Degenerate(
            "extreme outcome never observed; increase smoothing".into(),
        ));
    }
    let base = (p[0] * p[l - 1]).ln();
    (0..l)
        .map(|y| {
            if y == 0 || y == l - 1 {
                Ok(0.0)
            } else if p[y] > 0.0 && p[l - 1 - y] > 0.0 {
                Ok(0.5 * ((p[y] * p[l - 1 - y]).ln() - base))
            } else {
                Err(Error::Degenerate(format!("outcome {y} never observed")))
            }
        })
        .collect()
}

fn home_score(freqs: &OutcomeFrequencies) -> Result<f64> {
    match freqs.mean_home_score {
        None => Err(Error::Degenerate("no home-venue matches".into())),
        Some(d) if d > 0.0 && d < 1.0 => Ok(d),
        Some(d) => Err(Error::Degenerate(format!(
            "mean home score {d} leaves the advantage unbounded"
        ))),
    }
}

/// `η̂ = logit(δ̄_hfa)·β_{AC→L}(α̂)`.
pub fn simple_eta(freqs: &OutcomeFrequencies, alpha: &[f64], scores: &OutcomeScale) -> Result<f64> {
    let d = home_score(freqs)?;
    let params = AcParams::new(alpha.to_vec(), scores.clone(), 1.0, 0.0)?;
    Ok(math::logit(d) * beta_ac_to_logistic(&params)?.factor)
}

/// Exact solution of `G^AC(η) = δ̄_hfa` by bisection.
pub fn simple_eta_exact(freqs: &OutcomeFrequencies, alpha: &[f64], scores: &OutcomeScale) -> Result<f64> {
    let d = home_score(freqs)?;
    let params = AcParams::new(alpha.to_vec(), scores.clone(), 1.0, 0.0)?;
    let (mut lo, mut hi) = (-1.0, 1.0);
    while params.expected_score_u(lo) > d {
        lo *= 2.0;
        if lo < -crate::outcome_model::MAX_ABS_PREDICTOR {
            return Err(Error::Degenerate("no bracket for the advantage".into()));
        }
    }
    while params.expected_score_u(hi) < d {
        hi *= 2.0;
        if hi > crate::outcome_model::MAX_ABS_PREDICTOR {
            return Err(Error::Degenerate("no bracket for the advantage".into()));
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if params.expected_score_u(mid) < d {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// `β̂ = 1/β_{AC→L}(α̂)`, ignoring estimation noise.
pub fn simple_beta(alpha: &[f64], scores: &OutcomeScale) -> Result<f64> {
    let params = AcParams::new(alpha.to_vec(), scores.clone(), 1.0, 0.0)?;
    Ok(1.0 / beta_ac_to_logistic(&params)?.factor)
}

/// A point in the `(γ, η, α)` parameter space.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelPoint {
    pub gamma: f64,
    pub hfa: f64,
    /// Free entries `α_1 … α_k` of a symmetric model.
    pub free_alpha: Vec<f64>,
}

/// Which parameters the batch fit may move.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FitConstraints {
    pub fixed_gamma: Option<f64>,
    pub fixed_hfa: Option<f64>,
    /// Fixed free `α` entries.
    pub fixed_alpha: Option<Vec<f64>>,
}

impl FitConstraints {
    /// Fit `γ` only, with `η` and `α` frozen.
    pub fn scale_only(hfa: f64, free_alpha: Vec<f64>) -> Self {
        Self {
            fixed_gamma: None,
            fixed_hfa: Some(hfa),
            fixed_alpha: Some(free_alpha),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    /// Stop when every gradient component is below this in magnitude.
    pub gradient_tol: f64,
    pub max_iterations: usize,
    /// Additive smoothing used for the closed-form warm start.
    pub smoothing: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            gradient_tol: 1e-8,
            max_iterations: 500,
            smoothing: DEFAULT_SMOOTHING,
        }
    }
}

/// Result of a batch fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    pub point: ModelPoint,
    pub alpha: Vec<f64>,
    pub loglik: f64,
    /// Log-likelihood after each accepted iteration, starting at the initial point.
    pub history: Vec<f64>,
    pub iterations: usize,
    /// Largest free-gradient component at the returned point.
    pub gradient_norm: f64,
}

impl FitResult {
    pub fn beta(&self) -> f64 {
        1.0 / self.point.gamma
    }
}

/// Total log-likelihood `Σ ℓ_{y_t}(γ z_t/s + η h_t; α)`.
pub fn log_likelihood_at(
    samples: &[Observation],
    scale: f64,
    scores: &OutcomeScale,
    point: &ModelPoint,
) -> f64 {
    let l = scores.levels();
    let alpha = expand_symmetric_alpha(&point.free_alpha, l);
    let delta = scores.scores();
    samples
        .iter()
        .map(|s| {
            let u = point.gamma * s.diff / scale + if s.home_venue { point.hfa } else { 0.0 };
            if l == 2 {
                let u = u * (delta[1] - delta[0]);
                if s.outcome == 1 {
                    math::log_sigmoid(u)
                } else {
                    math::log_sigmoid(-u)
                }
            } else {
                crate::outcome_model::log_prob_at(&alpha, delta, s.outcome, u)
            }
        })
        .sum()
}

/// Analytic gradient of [`log_likelihood_at`] in the order
/// `(γ, η, α_1, …, α_k)`.
pub fn gradient_at(
    samples: &[Observation],
    scale: f64,
    scores: &OutcomeScale,
    point: &ModelPoint,
) -> Vec<f64> {
    let mask = Mask {
        gamma: true,
        hfa: true,
        alpha: true,
    };
    let (g, _) = derivatives(samples, scale, scores, point, mask);
    g.iter().copied().collect()
}

#[derive(Debug, Clone, Copy)]
struct Mask {
    gamma: bool,
    hfa: bool,
    alpha: bool,
}

/// Gradient and Hessian over the free block. The Hessian is minus the sum of
/// per-sample covariances of the sufficient statistics.
fn derivatives(
    samples: &[Observation],
    scale: f64,
    scores: &OutcomeScale,
    point: &ModelPoint,
    mask: Mask,
) -> (DVector<f64>, DMatrix<f64>) {
    let l = scores.levels();
    let k = if mask.alpha { point.free_alpha.len() } else { 0 };
    let p = mask.gamma as usize + mask.hfa as usize + k;
    let alpha = expand_symmetric_alpha(&point.free_alpha, l);
    let delta = scores.scores();
    let mut grad = DVector::zeros(p);
    let mut hess = DMatrix::zeros(p, p);
    let mut probs = vec![0.0; l];
    let mut feats = DMatrix::<f64>::zeros(l, p);
    let mut mean = DVector::<f64>::zeros(p);
    // level -> free alpha group
    let group: Vec<Option<usize>> = (0..l)
        .map(|y| {
            if y == 0 || y == l - 1 {
                None
            } else {
                Some((y - 1).min(l - 2 - y))
            }
        })
        .collect();
    for s in samples {
        let x = s.diff / scale;
        let h = if s.home_venue { 1.0 } else { 0.0 };
        let u = point.gamma * x + point.hfa * h;
        probs_at(&alpha, delta, u, &mut probs);
        feats.fill(0.0);
        for lv in 0..l {
            let mut c = 0;
            if mask.gamma {
                feats[(lv, c)] = delta[lv] * x;
                c += 1;
            }
            if mask.hfa {
                feats[(lv, c)] = delta[lv] * h;
                c += 1;
            }
            if mask.alpha {
                if let Some(g) = group[lv] {
                    feats[(lv, c + g)] = 1.0;
                }
            }
        }
        mean.fill(0.0);
        for lv in 0..l {
            for c in 0..p {
                mean[c] += probs[lv] * feats[(lv, c)];
            }
        }
        for c in 0..p {
            grad[c] += feats[(s.outcome, c)] - mean[c];
        }
        for lv in 0..l {
            for a in 0..p {
                let fa = feats[(lv, a)] - mean[a];
                if fa == 0.0 {
                    continue;
                }
                for b in a..p {
                    hess[(a, b)] -= probs[lv] * fa * (feats[(lv, b)] - mean[b]);
                }
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            hess[(a, b)] = hess[(b, a)];
        }
    }
    (grad, hess)
}

fn names(mask: Mask, k: usize) -> Vec<String> {
    let mut v = Vec::new();
    if mask.gamma {
        v.push("gamma".to_string());
    }
    if mask.hfa {
        v.push("eta".to_string());
    }
    if mask.alpha {
        v.extend((1..=k).map(|i| format!("alpha_{i}")));
    }
    v
}

fn apply_step(point: &ModelPoint, mask: Mask, step: &DVector<f64>, t: f64) -> ModelPoint {
    let mut next = point.clone();
    let mut c = 0;
    if mask.gamma {
        next.gamma += t * step[c];
        c += 1;
    }
    if mask.hfa {
        next.hfa += t * step[c];
        c += 1;
    }
    if mask.alpha {
        for a in next.free_alpha.iter_mut() {
            *a += t * step[c];
            c += 1;
        }
    }
    next
}

/// Newton ascent with backtracking from `start`, moving only the
/// parameters not fixed by `constraints`.
pub fn fit_from(
    samples: &[Observation],
    scale: f64,
    scores: &OutcomeScale,
    start: ModelPoint,
    constraints: &FitConstraints,
    options: &FitOptions,
) -> Result<FitResult> {
    let l = scores.levels();
    check_observations(samples, l)?;
    if !(scale > 0.0) || !scale.is_finite() {
        return Err(Error::InvalidParameter(format!("scale {scale}")));
    }
    let k = free_alpha_count(l);
    if start.free_alpha.len() != k {
        return Err(Error::InvalidParameter(format!(
            "{l} levels need {k} free alpha values, got {}",
            start.free_alpha.len()
        )));
    }
    if !scores.is_symmetric() {
        return Err(Error::Asymmetric("outcome scores".into()));
    }
    let first = samples[0].outcome;
    if samples.iter().all(|s| s.outcome == first) {
        return Err(Error::Degenerate(format!("all outcomes equal {first}")));
    }
    let mut point = start;
    if let Some(g) = constraints.fixed_gamma {
        point.gamma = g;
    }
    if let Some(h) = constraints.fixed_hfa {
        point.hfa = h;
    }
    if let Some(a) = &constraints.fixed_alpha {
        if a.len() != k {
            return Err(Error::InvalidParameter("fixed alpha length".into()));
        }
        point.free_alpha = a.clone();
    }
    let mask = Mask {
        gamma: constraints.fixed_gamma.is_none(),
        hfa: constraints.fixed_hfa.is_none(),
        alpha: constraints.fixed_alpha.is_none() && k > 0,
    };
    let labels = names(mask, k);
    let mut loglik = log_likelihood_at(samples, scale, scores, &point);
    if !loglik.is_finite() {
        return Err(Error::NonFinite("log-likelihood at the initial point"));
    }
    let mut history = vec![loglik];
    if labels.is_empty() {
        return Ok(FitResult {
            alpha: expand_symmetric_alpha(&point.free_alpha, l),
            point,
            loglik,
            history,
            iterations: 0,
            gradient_norm: 0.0,
        });
    }
    let mut gnorm = f64::INFINITY;
    for iter in 0..options.max_iterations {
        let (grad, hess) = derivatives(samples, scale, scores, &point, mask);
        gnorm = grad.amax();
        if gnorm < options.gradient_tol {
            return Ok(FitResult {
                alpha: expand_symmetric_alpha(&point.free_alpha, l),
                point,
                loglik,
                history,
                iterations: iter,
                gradient_norm: gnorm,
            });
        }
        let neg = -hess;
        let max_diag = neg.diagonal().amax();
        for (i, name) in labels.iter().enumerate() {
            if !(neg[(i, i)] > 1e-12 * max_diag.max(1e-300)) {
                return Err(Error::RankDeficient(format!("{name} is not identifiable from the data")));
            }
        }
        let eig = neg.clone().symmetric_eigen();
        let (lo, hi) = eig
            .eigenvalues
            .iter()
            .fold((f64::INFINITY, 0f64), |(lo, hi), &e| (lo.min(e), hi.max(e.abs())));
        let chol = if lo > 1e-10 * hi { neg.cholesky() } else { None };
        let Some(chol) = chol else {
            return Err(Error::RankDeficient(format!(
                "curvature of ({}) is singular",
                labels.join(", ")
            )));
        };
        let step = chol.solve(&grad);
        let slope = grad.dot(&step);
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let cand = apply_step(&point, mask, &step, t);
            let ll = log_likelihood_at(samples, scale, scores, &cand);
            if ll.is_finite() && ll >= loglik + 1e-4 * t * slope {
                accepted = Some((cand, ll));
                break;
            }
            // Near the optimum the predicted gain drops below the rounding
            // noise of the summed log-likelihood; take the full Newton step.
            let noise = 1e-12 * loglik.abs().max(1.0);
            if t == 1.0 && slope < 1e3 * noise && ll.is_finite() && ll >= loglik - noise {
                accepted = Some((cand, ll));
                break;
            }
            t *= 0.5;
        }
        match accepted {
            Some((cand, ll)) => {
                point = cand;
                loglik = ll;
                history.push(ll);
            }
            None => {
                return Err(Error::NonConvergence {
                    iterations: iter,
                    gradient_norm: gnorm,
                });
            }
        }
    }
    let (grad, _) = derivatives(samples, scale, scores, &point, mask);
    gnorm = gnorm.min(grad.amax());
    if grad.amax() < options.gradient_tol {
        Ok(FitResult {
            alpha: expand_symmetric_alpha(&point.free_alpha, l),
            point,
            loglik,
            history,
            iterations: options.max_iterations,
            gradient_norm: grad.amax(),
        })
    } else {
        Err(Error::NonConvergence {
            iterations: options.max_iterations,
            gradient_norm: gnorm,
        })
    }
}

/// Closed-form warm start `(1/β̂, η̂, α̂)`; `η̂ = 0` without usable home matches.
pub fn closed_form_start(
    samples: &[Observation],
    scores: &OutcomeScale,
    smoothing: f64,
) -> Result<ModelPoint> {
    let freqs = outcome_frequencies(samples, scores, smoothing)?;
    let alpha = simple_alpha(&freqs)?;
    let beta = simple_beta(&alpha, scores)?;
    let hfa = simple_eta(&freqs, &alpha, scores).unwrap_or(0.0);
    let k = free_alpha_count(scores.levels());
    Ok(ModelPoint {
        gamma: 1.0 / beta,
        hfa,
        free_alpha: alpha[1..1 + k].to_vec(),
    })
}

/// Batch fit warm-started from the closed forms.
pub fn fit_full(
    samples: &[Observation],
    scale: f64,
    scores: &OutcomeScale,
    constraints: &FitConstraints,
    options: &FitOptions,
) -> Result<FitResult> {
    let start = closed_form_start(samples, scores, options.smoothing)?;
    fit_from(samples, scale, scores, start, constraints, options)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryFit {
    pub gamma: f64,
    pub hfa: f64,
    pub beta: f64,
    pub loglik: f64,
}

/// `max_{γ,η} Σ log L(±(γ z_t/s + η h_t))` for binary outcomes.
pub fn fit_binary(samples: &[Observation], scale: f64) -> Result<BinaryFit> {
    let scores = OutcomeScale::binary();
    check_observations(samples, 2)?;
    let z0 = samples[0].diff;
    if samples.iter().all(|s| s.diff == z0) {
        return Err(Error::RankDeficient("all skill differences are equal".into()));
    }
    let start = ModelPoint {
        gamma: 1.0,
        hfa: 0.0,
        free_alpha: Vec::new(),
    };
    let fit = fit_from(
        samples,
        scale,
        &scores,
        start,
        &FitConstraints::default(),
        &FitOptions::default(),
    )?;
    Ok(BinaryFit {
        gamma: fit.point.gamma,
        hfa: fit.point.hfa,
        beta: fit.beta(),
        loglik: fit.loglik,
    })
}

/// Settings of the online mini-batch scale adaptation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OnlineGammaOptions {
    /// Mini-batch length `W`.
    pub window: usize,
    /// Adaptation step `μ_γ`.
    pub rate: f64,
    pub initial_gamma: f64,
    pub min_gamma: f64,
}

impl Default for OnlineGammaOptions {
    fn default() -> Self {
        Self {
            window: 100,
            rate: 0.05,
            initial_gamma: 1.0,
            min_gamma: 1e-3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaTrace {
    /// `γ` in effect when sample `t` is predicted, before it is observed.
    pub gammas: Vec<f64>,
    /// Number of updates that hit the lower clamp.
    pub clamped: usize,
}

impl GammaTrace {
    pub fn betas(&self) -> impl Iterator<Item = f64> + '_ {
        self.gammas.iter().map(|g| 1.0 / g)
    }

    /// Mean of `β_t = 1/γ_t` over `range` of sample positions.
    pub fn mean_beta(&self, range: std::ops::Range<usize>) -> Option<f64> {
        let slice = self.gammas.get(range)?;
        (!slice.is_empty()).then(|| slice.iter().map(|g| 1.0 / g).sum::<f64>() / slice.len() as f64)
    }
}

/// Mini-batch gradient tracking of `γ` with `α̂` and `η̂` held fixed:
/// `γ ← γ + (μ/W) Σ_{last W} x_τ(δ_{y_τ} − G^AC(γ x_τ + η̂ h_τ))`, `x = z/s`.
/// Updates start once `W` samples have been seen.
pub fn online_gamma(
    samples: &[Observation],
    alpha: &[f64],
    hfa: f64,
    scores: &OutcomeScale,
    scale: f64,
    options: &OnlineGammaOptions,
) -> Result<GammaTrace> {
    if options.window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    if !(options.initial_gamma > 0.0) || !(options.min_gamma > 0.0) || !options.rate.is_finite() {
        return Err(Error::InvalidParameter("online gamma settings".into()));
    }
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!("scale {scale}")));
    }
    check_observations(samples, scores.levels())?;
    let params = AcParams::new(alpha.to_vec(), scores.clone(), 1.0, 0.0)?;
    let delta = scores.scores();
    let w = options.window;
    let mut gamma = options.initial_gamma;
    let mut gammas = Vec::with_capacity(samples.len());
    let mut clamped = 0;
    for t in 0..samples.len() {
        gammas.push(gamma);
        if t + 1 < w {
            continue;
        }
        let sum: f64 = samples[t + 1 - w..=t]
            .iter()
            .map(|s| {
                let x = s.diff / scale;
                let u = gamma * x + if s.home_venue { hfa } else { 0.0 };
                x * (delta[s.outcome] - params.expected_score_u(u))
            })
            .sum();
        gamma += options.rate * sum / w as f64;
        if gamma <= 0.0 || !gamma.is_finite() {
            gamma = options.min_gamma;
            clamped += 1;
        }
    }
    if clamped > 0 {
        log::warn!("online scale adaptation clamped {clamped} times");
    }
    Ok(GammaTrace { gammas, clamped })
}

/// Prediction model `(α̂, η̂, β̂)` with fit metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentifiedModel {
    pub method: String,
    pub alpha: Vec<f64>,
    #[serde(rename = "eta")]
    pub hfa: f64,
    pub beta: f64,
    /// Half-open range of training positions.
    pub train_window: Option<(usize, usize)>,
    pub train_size: usize,
    pub loglik: Option<f64>,
}

impl IdentifiedModel {
    pub fn new(method: impl Into<String>, alpha: Vec<f64>, hfa: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("beta {beta} must be positive")));
        }
        if !hfa.is_finite() || alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("identified model"));
        }
        Ok(Self {
            method: method.into(),
            alpha,
            hfa,
            beta,
            train_window: None,
            train_size: 0,
            loglik: None,
        })
    }

    pub fn gamma(&self) -> f64 {
        1.0 / self.beta
    }

    pub fn with_training(mut self, window: (usize, usize), loglik: Option<f64>) -> Self {
        self.train_window = Some(window);
        self.train_size = window.1.saturating_sub(window.0);
        self.loglik = loglik;
        self
    }

    /// AC parameters for prediction at ranking scale `s`: scale `s·β̂`, HFA `η̂`.
    pub fn to_params(&self, scale: f64, scores: &OutcomeScale) -> Result<AcParams> {
        AcParams::new(self.alpha.clone(), scores.clone(), scale * self.beta, self.hfa)
    }

    pub fn from_fit(method: impl Into<String>, fit: &FitResult) -> Result<Self> {
        let mut m = Self::new(method, fit.alpha.clone(), fit.point.hfa, fit.beta())?;
        m.loglik = Some(fit.loglik);
        Ok(m)
    }
}
