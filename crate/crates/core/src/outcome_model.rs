//! Probability models for ordinal match outcomes.
//!
//! The central object is the adjacent-categories (AC) model
//!
//! ```text
//! P_y(u) = exp(α_y + δ_y u) / Σ_l exp(α_l + δ_l u),   u = z/s + η·h
//! ```
//!
//! where `z` is a skill difference in skill points, `s` the scale, `η` the
//! scale-free home-field advantage and `h` the venue flag. For two levels it
//! reduces to the logistic model. All evaluations subtract the maximal
//! exponent before exponentiating; log-likelihoods are computed in log space.
//!
//! The linear predictor is limited to `|u| ≤ 700` ([`MAX_ABS_PREDICTOR`]);
//! beyond it the tail probabilities underflow and inputs are rejected.

use std::f64::consts::{LN_10, PI};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::math;

/// Largest admissible magnitude of the linear predictor `u`.
pub const MAX_ABS_PREDICTOR: f64 = 700.0;

const SYMMETRY_TOL: f64 = 1e-12;

fn check_finite(z: f64, what: &'static str) -> Result<f64> {
    if z.is_finite() {
        Ok(z)
    } else {
        Err(Error::NonFinite(what))
    }
}

/// Canonical logistic function `1/(1+e^{-z})`.
pub fn logistic(z: f64) -> Result<f64> {
    check_finite(z, "logistic argument").map(math::sigmoid)
}

/// Logistic function with exponent base `a`: `1/(1+a^{-z})`.
pub fn generalized_logistic(z: f64, base: f64) -> Result<f64> {
    check_finite(z, "logistic argument")?;
    if !(base > 0.0) || base == 1.0 || !base.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent base {base}")));
    }
    Ok(math::sigmoid(z * base.ln()))
}

/// Standard normal CDF.
pub fn gaussian_cdf(z: f64) -> Result<f64> {
    check_finite(z, "gaussian cdf argument").map(math::norm_cdf)
}

/// Ordered outcome scores `δ_0 = 0 < δ_1 < … < δ_{L-1} = 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct OutcomeScale {
    scores: Vec<f64>,
}

impl OutcomeScale {
    pub fn new(scores: Vec<f64>) -> Result<Self> {
        if scores.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "outcome scale needs at least 2 levels, got {}",
                scores.len()
            )));
        }
        if scores.iter().any(|d| !d.is_finite()) {
            return Err(Error::NonFinite("outcome score"));
        }
        if scores[0] != 0.0 || scores[scores.len() - 1] != 1.0 {
            return Err(Error::InvalidParameter(
                "outcome scores must start at 0 and end at 1".into(),
            ));
        }
        if scores.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidParameter(
                "outcome scores must be strictly increasing".into(),
            ));
        }
        Ok(Self { scores })
    }

    /// Uniformly spaced scores `y/(L-1)`.
    pub fn uniform(levels: usize) -> Result<Self> {
        if levels < 2 {
            return Err(Error::InvalidParameter(format!(
                "outcome scale needs at least 2 levels, got {levels}"
            )));
        }
        let n = (levels - 1) as f64;
        Self::new((0..levels).map(|y| y as f64 / n).collect())
    }

    pub fn binary() -> Self {
        Self { scores: vec![0.0, 1.0] }
    }

    pub fn levels(&self) -> usize {
        self.scores.len()
    }

    pub fn scores(&self) -> &[f64] {
        &self.scores
    }

    pub fn score(&self, y: usize) -> Result<f64> {
        self.scores.get(y).copied().ok_or(Error::OutcomeIndex {
            index: y,
            levels: self.levels(),
        })
    }

    /// `δ_y = 1 - δ_{L-1-y}` for all `y`.
    pub fn is_symmetric(&self) -> bool {
        let l = self.levels();
        (0..l).all(|y| (self.scores[y] + self.scores[l - 1 - y] - 1.0).abs() <= SYMMETRY_TOL)
    }

    pub fn is_uniform(&self) -> bool {
        let n = (self.levels() - 1) as f64;
        self.scores
            .iter()
            .enumerate()
            .all(|(y, d)| (d - y as f64 / n).abs() <= SYMMETRY_TOL)
    }
}

impl TryFrom<Vec<f64>> for OutcomeScale {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<OutcomeScale> for Vec<f64> {
    fn from(s: OutcomeScale) -> Self {
        s.scores
    }
}

// ---------------------------------------------------------------------------
// Kernels on the linear predictor. `alpha` and `delta` have equal length.

/// Category probabilities at predictor `u`, written into `out`.
pub fn probs_at(alpha: &[f64], delta: &[f64], u: f64, out: &mut [f64]) {
    let mut max = f64::NEG_INFINITY;
    for ((o, a), d) in out.iter_mut().zip(alpha).zip(delta) {
        *o = a + d * u;
        max = max.max(*o);
    }
    let mut total = 0.0;
    for o in out.iter_mut() {
        *o = (*o - max).exp();
        total += *o;
    }
    for o in out.iter_mut() {
        *o /= total;
    }
}

/// `log P_y(u)`.
pub fn log_prob_at(alpha: &[f64], delta: &[f64], y: usize, u: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (a, d) in alpha.iter().zip(delta) {
        max = max.max(a + d * u);
    }
    let total: f64 = alpha
        .iter()
        .zip(delta)
        .map(|(a, d)| (a + d * u - max).exp())
        .sum();
    alpha[y] + delta[y] * u - max - total.ln()
}

/// Expected score `G^AC(u) = Σ δ_l P_l(u)`.
pub fn expected_score_at(alpha: &[f64], delta: &[f64], u: f64) -> f64 {
    let mut max = f64::NEG_INFINITY;
    for (a, d) in alpha.iter().zip(delta) {
        max = max.max(a + d * u);
    }
    let mut num = 0.0;
    let mut den = 0.0;
    for (a, d) in alpha.iter().zip(delta) {
        let w = (a + d * u - max).exp();
        num += d * w;
        den += w;
    }
    num / den
}

/// Parameters of the adjacent-categories model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AcParamsRepr", into = "AcParamsRepr")]
pub struct AcParams {
    scale: f64,
    hfa: f64,
    alpha: Vec<f64>,
    scores: OutcomeScale,
    symmetric: bool,
}

#[derive(Serialize, Deserialize)]
struct AcParamsRepr {
    #[serde(rename = "L")]
    levels: usize,
    s: f64,
    eta: f64,
    alpha: Vec<f64>,
    delta: Vec<f64>,
}

impl TryFrom<AcParamsRepr> for AcParams {
    type Error = Error;
    fn try_from(r: AcParamsRepr) -> Result<Self> {
        if r.alpha.len() != r.levels || r.delta.len() != r.levels {
            return Err(Error::InvalidParameter(format!(
                "L = {} but alpha has {} and delta {} entries",
                r.levels,
                r.alpha.len(),
                r.delta.len()
            )));
        }
        AcParams::new(r.alpha, OutcomeScale::new(r.delta)?, r.s, r.eta)
    }
}

impl From<AcParams> for AcParamsRepr {
    fn from(p: AcParams) -> Self {
        AcParamsRepr {
            levels: p.levels(),
            s: p.scale,
            eta: p.hfa,
            alpha: p.alpha,
            delta: p.scores.into(),
        }
    }
}

impl AcParams {
    /// Builds a model from a full-length `alpha`. Asymmetric `alpha` is
    /// accepted and reported by [`AcParams::is_symmetric`].
    pub fn new(alpha: Vec<f64>, scores: OutcomeScale, scale: f64, hfa: f64) -> Result<Self> {
        let l = scores.levels();
        if alpha.len() != l {
            return Err(Error::InvalidParameter(format!(
                "alpha has {} entries for {} levels",
                alpha.len(),
                l
            )));
        }
        if alpha.iter().any(|a| !a.is_finite()) {
            return Err(Error::NonFinite("alpha"));
        }
        if alpha[0] != 0.0 || alpha[l - 1] != 0.0 {
            return Err(Error::InvalidParameter(
                "alpha_0 and alpha_{L-1} must be zero".into(),
            ));
        }
        if !(scale > 0.0) || !scale.is_finite() {
            return Err(Error::InvalidParameter(format!("scale {scale}")));
        }
        if !hfa.is_finite() {
            return Err(Error::NonFinite("hfa"));
        }
        let symmetric = scores.is_symmetric()
            && (0..l).all(|y| (alpha[y] - alpha[l - 1 - y]).abs() <= SYMMETRY_TOL);
        Ok(Self {
            scale,
            hfa,
            alpha,
            scores,
            symmetric,
        })
    }

    /// Symmetric model from its free parameters `α_1 … α_k`,
    /// `k = ⌈(L-2)/2⌉`; mirrored entries are tied.
    pub fn symmetric(free_alpha: &[f64], scores: OutcomeScale, scale: f64, hfa: f64) -> Result<Self> {
        let l = scores.levels();
        let k = free_alpha_count(l);
        if free_alpha.len() != k {
            return Err(Error::InvalidParameter(format!(
                "{l} levels need {k} free alpha values, got {}",
                free_alpha.len()
            )));
        }
        Self::new(expand_symmetric_alpha(free_alpha, l), scores, scale, hfa)
    }

    /// Binary logistic model.
    pub fn logistic(scale: f64, hfa: f64) -> Result<Self> {
        Self::new(vec![0.0, 0.0], OutcomeScale::binary(), scale, hfa)
    }

    pub fn levels(&self) -> usize {
        self.alpha.len()
    }
    pub fn scale(&self) -> f64 {
        self.scale
    }
    pub fn hfa(&self) -> f64 {
        self.hfa
    }
    pub fn alpha(&self) -> &[f64] {
        &self.alpha
    }
    pub fn scores(&self) -> &OutcomeScale {
        &self.scores
    }
    pub fn delta(&self) -> &[f64] {
        self.scores.scores()
    }
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn with_scale(&self, scale: f64) -> Result<Self> {
        Self::new(self.alpha.clone(), self.scores.clone(), scale, self.hfa)
    }

    pub fn with_hfa(&self, hfa: f64) -> Result<Self> {
        Self::new(self.alpha.clone(), self.scores.clone(), self.scale, hfa)
    }

    /// The free parameters `α_1 … α_k` of a symmetric model.
    pub fn free_alpha(&self) -> Vec<f64> {
        self.alpha[1..1 + free_alpha_count(self.levels())].to_vec()
    }

    /// Linear predictor `u = z/s + η·h`, validated against the range limit.
    pub fn predictor(&self, z: f64, home_venue: bool) -> Result<f64> {
        check_finite(z, "skill difference")?;
        let u = z / self.scale + if home_venue { self.hfa } else { 0.0 };
        if u.abs() > MAX_ABS_PREDICTOR {
            return Err(Error::OutOfRange(format!(
                "|z/s + eta*h| = {} exceeds {MAX_ABS_PREDICTOR}",
                u.abs()
            )));
        }
        Ok(u)
    }

    fn check_outcome(&self, y: usize) -> Result<()> {
        if y < self.levels() {
            Ok(())
        } else {
            Err(Error::OutcomeIndex {
                index: y,
                levels: self.levels(),
            })
        }
    }

    /// `P_y(z/s + η·h)`.
    pub fn prob(&self, y: usize, z: f64, home_venue: bool) -> Result<f64> {
        self.check_outcome(y)?;
        let u = self.predictor(z, home_venue)?;
        Ok(self.prob_u(y, u))
    }

    /// All category probabilities.
    pub fn probs(&self, z: f64, home_venue: bool) -> Result<Vec<f64>> {
        let u = self.predictor(z, home_venue)?;
        let mut out = vec![0.0; self.levels()];
        probs_at(&self.alpha, self.delta(), u, &mut out);
        Ok(out)
    }

    /// Expected score `G^AC(z/s + η·h)`.
    pub fn expected_score(&self, z: f64, home_venue: bool) -> Result<f64> {
        let u = self.predictor(z, home_venue)?;
        Ok(self.expected_score_u(u))
    }

    /// `log P_y(z/s + η·h)`, computed in log space.
    pub fn log_likelihood(&self, y: usize, z: f64, home_venue: bool) -> Result<f64> {
        self.check_outcome(y)?;
        let u = self.predictor(z, home_venue)?;
        Ok(self.log_prob_u(y, u))
    }

    /// `δ_y - G^AC(u)`: derivative of the log-likelihood with respect to `u`.
    pub fn score_residual(&self, y: usize, z: f64, home_venue: bool) -> Result<f64> {
        self.check_outcome(y)?;
        let u = self.predictor(z, home_venue)?;
        Ok(self.delta()[y] - self.expected_score_u(u))
    }

    /// Probability of `y` at a raw predictor value (no validation).
    #[inline]
    pub fn prob_u(&self, y: usize, u: f64) -> f64 {
        if self.levels() == 2 {
            // identical code path to the logistic function
            let p1 = math::sigmoid(u);
            return if y == 1 { p1 } else { math::sigmoid(-u) };
        }
        self.log_prob_u(y, u).exp()
    }

    #[inline]
    pub fn log_prob_u(&self, y: usize, u: f64) -> f64 {
        if self.levels() == 2 {
            return if y == 1 {
                math::log_sigmoid(u)
            } else {
                math::log_sigmoid(-u)
            };
        }
        log_prob_at(&self.alpha, self.delta(), y, u)
    }

    #[inline]
    pub fn expected_score_u(&self, u: f64) -> f64 {
        if self.levels() == 2 {
            return math::sigmoid(u);
        }
        expected_score_at(&self.alpha, self.delta(), u)
    }
}

/// Number of free `α` entries of a symmetric `L`-level model, `⌈(L-2)/2⌉`.
pub fn free_alpha_count(levels: usize) -> usize {
    (levels.saturating_sub(2) + 1) / 2
}

/// Full-length symmetric `α` from its free entries.
pub fn expand_symmetric_alpha(free: &[f64], levels: usize) -> Vec<f64> {
    let mut alpha = vec![0.0; levels];
    for (k, a) in free.iter().enumerate() {
        alpha[k + 1] = *a;
        alpha[levels - 2 - k] = *a;
    }
    alpha
}

/// AC model exactly equivalent to multilevel Elo with uniform scores:
/// `α_y = log C(L-1, y)`, `δ_y = y/(L-1)`.
pub fn binomial_ac_params(levels: usize, scale: f64, hfa: f64) -> Result<AcParams> {
    let scores = OutcomeScale::uniform(levels)?;
    let alpha = (0..levels)
        .map(|y| math::binomial(levels - 1, y).ln())
        .collect();
    AcParams::new(alpha, scores, scale, hfa)
}

/// Origin of a scale conversion factor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConversionKind {
    BaseChange,
    LogisticToGaussianDerivative,
    LogisticToGaussianMoment,
    AcToLogistic,
    ErrorCorrection,
}

/// A multiplicative scale adjustment `s̃ = β·s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScaleConversion {
    pub factor: f64,
    pub kind: ConversionKind,
}

impl ScaleConversion {
    pub fn new(factor: f64, kind: ConversionKind) -> Result<Self> {
        if factor > 0.0 && factor.is_finite() {
            Ok(Self { factor, kind })
        } else {
            Err(Error::InvalidParameter(format!(
                "scale conversion factor {factor} must be positive"
            )))
        }
    }

    pub fn apply(&self, scale: f64) -> f64 {
        scale * self.factor
    }

    pub fn inverse(&self) -> Self {
        Self {
            factor: 1.0 / self.factor,
            kind: self.kind,
        }
    }
}

/// `β_{AC→L} = [4 Σδ²e^α / Σe^α - 1]^{-1}`: matches the slope of the AC
/// expected score at zero with a canonical logistic function.
pub fn beta_ac_to_logistic(params: &AcParams) -> Result<ScaleConversion> {
    if !params.is_symmetric() {
        return Err(Error::Asymmetric(
            "slope matching assumes a symmetric AC model".into(),
        ));
    }
    let (num, den) = params
        .alpha()
        .iter()
        .zip(params.delta())
        .fold((0.0, 0.0), |(n, d), (a, dl)| {
            let w = a.exp();
            (n + dl * dl * w, d + w)
        });
    let denom = 4.0 * num / den - 1.0;
    if !(denom > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "non-positive slope-matching denominator {denom}"
        )));
    }
    ScaleConversion::new(1.0 / denom, ConversionKind::AcToLogistic)
}

/// `β_{e→a} = ln a`.
pub fn beta_base_change(base: f64) -> Result<ScaleConversion> {
    if !(base > 0.0) || base == 1.0 || !base.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent base {base}")));
    }
    ScaleConversion::new(base.ln(), ConversionKind::BaseChange)
}

/// Convention for approximating the logistic by the Gaussian CDF.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GaussianMatch {
    /// Equal slopes at zero: `4/√(2π)`.
    #[default]
    Derivative,
    /// Equal variances: `π/√3`.
    Moment,
}

/// `β_{L→Φ}` under the chosen matching convention.
pub fn beta_logistic_to_gaussian(method: GaussianMatch) -> ScaleConversion {
    match method {
        GaussianMatch::Derivative => ScaleConversion {
            factor: 4.0 / (2.0 * PI).sqrt(),
            kind: ConversionKind::LogisticToGaussianDerivative,
        },
        GaussianMatch::Moment => ScaleConversion {
            factor: PI / 3f64.sqrt(),
            kind: ConversionKind::LogisticToGaussianMoment,
        },
    }
}

/// Home-field advantage after a change of scale by `β`; `η·s` is preserved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HfaRescaling {
    /// `η̃ = η/β`
    pub hfa: f64,
    pub factor: f64,
}

impl HfaRescaling {
    pub fn scale(&self, scale: f64) -> f64 {
        scale * self.factor
    }
}

pub fn rescale_hfa(hfa: f64, factor: f64) -> Result<HfaRescaling> {
    check_finite(hfa, "hfa")?;
    if !(factor > 0.0) || !factor.is_finite() {
        return Err(Error::InvalidParameter(format!("scale factor {factor}")));
    }
    Ok(HfaRescaling {
        hfa: hfa / factor,
        factor,
    })
}

/// `ln 10`, the base-10 to canonical conversion used by FIDE/FIFA-style scales.
pub const BASE10_FACTOR: f64 = LN_10;
