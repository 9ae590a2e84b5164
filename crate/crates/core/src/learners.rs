//! One-dimensional online learners for linear losses, and their
//! coordinate-wise vector wrapper.
//!
//! Every learner starts at `Δ_0 = 0`, receives `v_t`, and outputs `Δ_t`:
//!
//! | kind | update |
//! |------|--------|
//! | OGD | `Π_[−D,D](Δ_{t−1} − η v_t)` (unprojected without a domain) |
//! | no-momentum SGD | `−α_t v_t` |
//! | no-momentum AdaGrad | `−α_t v_t / sqrt(Σ_{s≤t} v_s²)` |
//! | scale-free FTRL | `−α_t Σ v_s / sqrt(Σ v_s²)` |
//! | discounted FTRL | `−α_t Σ β1^{t−s} v_s / sqrt(Σ (β2^{t−s} v_s)²)` |
//! | clipped discounted FTRL | `−clip_D(α_t m_t / sqrt(q_t))` |
//!
//! Any zero denominator yields `Δ_t = 0`. There is no ε and no debiasing.
//! Applied coordinate-wise to gradients, discounted FTRL is Adam with the
//! scaled learning rate `α_t = γ_t (1 − β1) / sqrt(1 − β2²)`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{OluError, Result};
use crate::moments::{check_discount, DiscountedMoments};
use crate::scalar::{clip, ratio_or_zero, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LearnerKind {
    Ogd,
    #[serde(alias = "sgd")]
    NoMomentumSgd,
    #[serde(alias = "adagrad")]
    NoMomentumAdagrad,
    ScaleFreeFtrl,
    #[serde(alias = "beta_ftrl", alias = "adam")]
    DiscountedFtrl,
    #[serde(alias = "beta_ftrl_clipped")]
    DiscountedFtrlClipped,
}

impl LearnerKind {
    pub const ALL: [LearnerKind; 6] = [
        LearnerKind::Ogd,
        LearnerKind::NoMomentumSgd,
        LearnerKind::NoMomentumAdagrad,
        LearnerKind::ScaleFreeFtrl,
        LearnerKind::DiscountedFtrl,
        LearnerKind::DiscountedFtrlClipped,
    ];

    pub fn name(self) -> &'static str {
        match self {
            LearnerKind::Ogd => "ogd",
            LearnerKind::NoMomentumSgd => "sgd",
            LearnerKind::NoMomentumAdagrad => "adagrad",
            LearnerKind::ScaleFreeFtrl => "scale_free_ftrl",
            LearnerKind::DiscountedFtrl => "discounted_ftrl",
            LearnerKind::DiscountedFtrlClipped => "discounted_ftrl_clipped",
        }
    }

    fn uses_moments(self) -> bool {
        matches!(
            self,
            LearnerKind::ScaleFreeFtrl | LearnerKind::DiscountedFtrl | LearnerKind::DiscountedFtrlClipped
        )
    }

    fn is_discounted(self) -> bool {
        matches!(self, LearnerKind::DiscountedFtrl | LearnerKind::DiscountedFtrlClipped)
    }

    /// Scale-free kinds produce identical plays on `k·v` for every `k > 0`.
    pub fn is_scale_free(self) -> bool {
        self.uses_moments()
    }
}

impl fmt::Display for LearnerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Scaled learning rate `α_t`, evaluated at the 1-based step `t`.
#[derive(Clone)]
pub enum AlphaSchedule<S> {
    Constant(S),
    /// `α / sqrt(t)`
    InvSqrt(S),
    Custom(Arc<dyn Fn(usize) -> S + Send + Sync>),
}

impl<S: Scalar> AlphaSchedule<S> {
    pub fn at(&self, t: usize) -> S {
        match self {
            AlphaSchedule::Constant(a) => *a,
            AlphaSchedule::InvSqrt(a) => *a / S::from_usize_lossy(t.max(1)).sqrt(),
            AlphaSchedule::Custom(f) => f(t),
        }
    }

    pub fn constant(&self) -> Option<S> {
        match self {
            AlphaSchedule::Constant(a) => Some(*a),
            _ => None,
        }
    }
}

impl<S: fmt::Debug> fmt::Debug for AlphaSchedule<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AlphaSchedule::Constant(a) => f.debug_tuple("Constant").field(a).finish(),
            AlphaSchedule::InvSqrt(a) => f.debug_tuple("InvSqrt").field(a).finish(),
            AlphaSchedule::Custom(_) => f.write_str("Custom(..)"),
        }
    }
}

/// `α = γ (1 − β1) / sqrt(1 − β2²)`. Undefined at `β2 = 1`.
pub fn alpha_from_gamma<S: Scalar>(gamma: S, beta1: S, beta2: S) -> Result<S> {
    check_discount("beta1", beta1)?;
    check_discount("beta2", beta2)?;
    if beta2 >= S::one() {
        return Err(OluError::config("gamma conversion needs beta2 < 1 (divides by sqrt(1 - beta2^2))"));
    }
    if !(gamma > S::zero()) || !gamma.is_finite() {
        return Err(OluError::config("gamma must be positive"));
    }
    Ok(gamma * (S::one() - beta1) / (S::one() - beta2 * beta2).sqrt())
}

#[derive(Debug, Clone)]
pub struct LearnerConfig<S> {
    pub kind: LearnerKind,
    pub alpha: AlphaSchedule<S>,
    /// OGD learning rate.
    pub eta: Option<S>,
    pub beta1: S,
    pub beta2: S,
    /// Output bound `D` of the clipped kind.
    pub clip: Option<S>,
    /// Optional projection domain `[−D, D]` of OGD.
    pub domain: Option<S>,
}

impl<S: Scalar> LearnerConfig<S> {
    fn base(kind: LearnerKind, alpha: S) -> Self {
        Self {
            kind,
            alpha: AlphaSchedule::Constant(alpha),
            eta: None,
            beta1: S::one(),
            beta2: S::one(),
            clip: None,
            domain: None,
        }
    }

    pub fn ogd(eta: S, domain: Option<S>) -> Self {
        Self {
            eta: Some(eta),
            domain,
            ..Self::base(LearnerKind::Ogd, S::one())
        }
    }

    pub fn sgd(alpha: S) -> Self {
        Self::base(LearnerKind::NoMomentumSgd, alpha)
    }

    pub fn adagrad(alpha: S) -> Self {
        Self::base(LearnerKind::NoMomentumAdagrad, alpha)
    }

    pub fn scale_free(alpha: S) -> Self {
        Self::base(LearnerKind::ScaleFreeFtrl, alpha)
    }

    pub fn discounted(alpha: S, beta1: S, beta2: S) -> Self {
        Self {
            beta1,
            beta2,
            ..Self::base(LearnerKind::DiscountedFtrl, alpha)
        }
    }

    /// Clipped discounted FTRL with a single discount `β`.
    pub fn clipped(alpha: S, beta: S, bound: S) -> Self {
        Self {
            beta1: beta,
            beta2: beta,
            clip: Some(bound),
            ..Self::base(LearnerKind::DiscountedFtrlClipped, alpha)
        }
    }

    /// Discounted FTRL from Adam's original learning rate `γ`.
    pub fn from_gamma(gamma: S, beta1: S, beta2: S) -> Result<Self> {
        Ok(Self::discounted(alpha_from_gamma(gamma, beta1, beta2)?, beta1, beta2))
    }

    pub fn with_schedule(mut self, alpha: AlphaSchedule<S>) -> Self {
        self.alpha = alpha;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, x: S| {
            if x > S::zero() && x.is_finite() {
                Ok(())
            } else {
                Err(OluError::config(format!("{name} must be positive and finite, got {x:?}")))
            }
        };
        match self.kind {
            LearnerKind::Ogd => {
                positive("eta", self.eta.ok_or_else(|| OluError::config("ogd needs eta"))?)?;
                if let Some(d) = self.domain {
                    positive("domain", d)?;
                }
            }
            _ => {
                if let Some(a) = self.alpha.constant() {
                    positive("alpha", a)?;
                }
            }
        }
        if self.kind.is_discounted() {
            check_discount("beta1", self.beta1)?;
            check_discount("beta2", self.beta2)?;
        } else if self.beta1 != S::one() || self.beta2 != S::one() {
            return Err(OluError::config(format!("{} takes no discount factors", self.kind)));
        }
        match (self.kind, self.clip) {
            (LearnerKind::DiscountedFtrlClipped, Some(d)) => positive("clip_d", d)?,
            (LearnerKind::DiscountedFtrlClipped, None) => {
                return Err(OluError::config("clipped learner needs clip_d"))
            }
            (_, Some(_)) => return Err(OluError::config(format!("{} takes no clip_d", self.kind))),
            _ => {}
        }
        if self.domain.is_some() && self.kind != LearnerKind::Ogd {
            return Err(OluError::config("only ogd takes a projection domain"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LearnerState<S> {
    pub moments: DiscountedMoments<S>,
    /// `Σ v_s²`, used by AdaGrad.
    pub sum_sq: S,
    pub last_play: S,
    pub t: usize,
}

/// A configured 1-D learner.
#[derive(Debug, Clone)]
pub struct Learner<S> {
    config: LearnerConfig<S>,
    state: LearnerState<S>,
}

impl<S: Scalar> Learner<S> {
    pub fn new(config: LearnerConfig<S>) -> Result<Self> {
        config.validate()?;
        let moments = if config.kind.uses_moments() {
            DiscountedMoments::new(config.beta1, config.beta2)?
        } else {
            DiscountedMoments::undiscounted()
        };
        Ok(Self {
            config,
            state: LearnerState {
                moments,
                sum_sq: S::zero(),
                last_play: S::zero(),
                t: 0,
            },
        })
    }

    pub fn config(&self) -> &LearnerConfig<S> {
        &self.config
    }

    pub fn state(&self) -> &LearnerState<S> {
        &self.state
    }

    /// The current play `Δ_t` (a function of `v_{1:t}`).
    pub fn play(&self) -> S {
        self.state.last_play
    }

    pub fn steps(&self) -> usize {
        self.state.t
    }

    /// Receives `v_{t+1}` and returns the next play `Δ_{t+1}`.
    pub fn step(&mut self, v: S) -> Result<S> {
        if !v.is_finite() {
            return Err(OluError::NonFinite { what: "loss", index: self.state.t + 1 });
        }
        let st = &mut self.state;
        st.t += 1;
        let t = st.t;
        let cfg = &self.config;
        let play = match cfg.kind {
            LearnerKind::Ogd => {
                let eta = cfg.eta.expect("validated");
                let x = st.last_play - eta * v;
                match cfg.domain {
                    Some(d) => x.max(-d).min(d),
                    None => x,
                }
            }
            LearnerKind::NoMomentumSgd => -cfg.alpha.at(t) * v,
            LearnerKind::NoMomentumAdagrad => {
                st.sum_sq = st.sum_sq + v * v;
                -cfg.alpha.at(t) * ratio_or_zero(v, st.sum_sq.sqrt())
            }
            LearnerKind::ScaleFreeFtrl | LearnerKind::DiscountedFtrl => {
                st.moments.push(v)?;
                -cfg.alpha.at(t) * st.moments.normalized()
            }
            LearnerKind::DiscountedFtrlClipped => {
                st.moments.push(v)?;
                -clip(cfg.alpha.at(t) * st.moments.normalized(), cfg.clip.expect("validated"))
            }
        };
        st.last_play = play;
        Ok(play)
    }
}

/// Runs a fresh learner over `losses` and returns `Δ_0..Δ_T` (length `T + 1`).
pub fn play_stream<S: Scalar>(config: &LearnerConfig<S>, losses: &[S]) -> Result<Vec<S>> {
    let mut learner = Learner::new(config.clone())?;
    let mut plays = Vec::with_capacity(losses.len() + 1);
    plays.push(learner.play());
    for &v in losses {
        plays.push(learner.step(v)?);
    }
    Ok(plays)
}

/// `a / b` plus one residual correction. Double-double division in
/// `twofloat` is only accurate to about a double ulp; the correction restores
/// full precision there and is harmless elsewhere.
fn refined_div<S: Scalar>(a: S, b: S) -> S {
    let q = a / b;
    q + (a - q * b) / b
}

/// Discounted FTRL evaluated literally, as FTRL on the rescaled losses
/// `ṽ_s = β1^{−s} g_s` with step `η_t = α_t (β1/β2)^t / sqrt(Σ_{s≤t} (β2^{−s} g_s)²)`.
/// Returns `Δ_1..Δ_T`, where `Δ_t` has seen `g_1..g_t`, matching
/// [`play_stream`] without its leading zero.
///
/// The scaled sums grow like `β^{−2t}`, so this is a reference for short
/// horizons in a wide-mantissa scalar such as [`crate::Extended`], not a
/// production path.
pub fn literal_scaled_ftrl<S: Scalar>(losses: &[S], alpha: &AlphaSchedule<S>, beta1: S, beta2: S) -> Result<Vec<S>> {
    check_discount("beta1", beta1)?;
    check_discount("beta2", beta2)?;
    let (inv1, inv2) = (refined_div(S::one(), beta1), refined_div(S::one(), beta2));
    let ratio = refined_div(beta1, beta2);
    let (mut p1, mut p2, mut pr) = (S::one(), S::one(), S::one());
    let (mut scaled_sum, mut scaled_sq) = (S::zero(), S::zero());
    let mut out = Vec::with_capacity(losses.len());
    for (k, &g) in losses.iter().enumerate() {
        p1 = p1 * inv1;
        p2 = p2 * inv2;
        pr = pr * ratio;
        scaled_sum = scaled_sum + p1 * g;
        let w = p2 * g;
        scaled_sq = scaled_sq + w * w;
        if !scaled_sq.is_finite() || !scaled_sum.is_finite() {
            return Err(OluError::NonFinite { what: "scaled loss sum", index: k + 1 });
        }
        if scaled_sq == S::zero() {
            out.push(S::zero());
            continue;
        }
        let eta = refined_div(alpha.at(k + 1) * pr, scaled_sq.sqrt());
        out.push(-(eta * scaled_sum));
    }
    Ok(out)
}

/// True iff the plays on `k·v` equal the plays on `v` within relative `1e-10`.
pub fn scale_invariance_check<S: Scalar>(config: &LearnerConfig<S>, losses: &[S], k: S) -> Result<bool> {
    if !(k > S::zero()) || !k.is_finite() {
        return Err(OluError::config("scale must be positive and finite"));
    }
    let scaled: Vec<S> = losses.iter().map(|&v| v * k).collect();
    let a = play_stream(config, losses)?;
    let b = play_stream(config, &scaled)?;
    let tol = crate::scalar::Tolerance::new(1e-10, 1e-300);
    Ok(a.iter().zip(&b).all(|(x, y)| tol.close(x.as_f64(), y.as_f64())))
}

/// `d` independent 1-D learners, one per coordinate.
#[derive(Debug, Clone)]
pub struct VectorLearner<S> {
    coords: Vec<Learner<S>>,
}

impl<S: Scalar> VectorLearner<S> {
    pub fn new(config: &LearnerConfig<S>, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(OluError::config("dimension must be positive"));
        }
        let coords = (0..dim).map(|_| Learner::new(config.clone())).collect::<Result<_>>()?;
        Ok(Self { coords })
    }

    /// One configuration per coordinate, e.g. coordinate-wise learning rates.
    pub fn from_configs(configs: Vec<LearnerConfig<S>>) -> Result<Self> {
        if configs.is_empty() {
            return Err(OluError::config("dimension must be positive"));
        }
        let coords = configs.into_iter().map(Learner::new).collect::<Result<_>>()?;
        Ok(Self { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn play(&self) -> Vec<S> {
        self.coords.iter().map(Learner::play).collect()
    }

    pub fn play_into(&self, out: &mut [S]) {
        for (o, l) in out.iter_mut().zip(&self.coords) {
            *o = l.play();
        }
    }

    pub fn step(&mut self, v: &[S]) -> Result<Vec<S>> {
        if v.len() != self.dim() {
            return Err(OluError::DimensionMismatch { expected: self.dim(), got: v.len() });
        }
        self.coords.iter_mut().zip(v).map(|(l, &x)| l.step(x)).collect()
    }

    pub fn coordinates(&self) -> &[Learner<S>] {
        &self.coords
    }
}

/// Serializable learner block (`{kind, alpha|gamma, eta, beta1, beta2, clip_d}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LearnerSpec {
    pub kind: LearnerKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta2: Option<f64>,
    #[serde(default, rename = "clipD", alias = "clip_d", skip_serializing_if = "Option::is_none")]
    pub clip_d: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub domain: Option<f64>,
}

/// Record of a `γ → α` conversion, for run manifests.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaConversion {
    pub gamma: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub alpha: f64,
}

impl LearnerSpec {
    pub fn resolve(&self) -> Result<(LearnerConfig<f64>, Option<GammaConversion>)> {
        let (alpha, conversion) = match (self.alpha, self.gamma) {
            (Some(_), Some(_)) => return Err(OluError::config("give either alpha or gamma, not both")),
            (Some(a), None) => (a, None),
            (None, Some(g)) => {
                if !self.kind.is_discounted() {
                    return Err(OluError::config("gamma only applies to discounted kinds"));
                }
                let b1 = self.beta1.unwrap_or(1.0);
                let b2 = self.beta2.unwrap_or(b1);
                let a = alpha_from_gamma(g, b1, b2)?;
                (a, Some(GammaConversion { gamma: g, beta1: b1, beta2: b2, alpha: a }))
            }
            (None, None) if self.kind == LearnerKind::Ogd => (1.0, None),
            (None, None) => return Err(OluError::config(format!("{} needs alpha or gamma", self.kind))),
        };
        let config = match self.kind {
            LearnerKind::Ogd => LearnerConfig::ogd(
                self.eta.ok_or_else(|| OluError::config("ogd needs eta"))?,
                self.domain,
            ),
            LearnerKind::NoMomentumSgd => LearnerConfig::sgd(alpha),
            LearnerKind::NoMomentumAdagrad => LearnerConfig::adagrad(alpha),
            LearnerKind::ScaleFreeFtrl => LearnerConfig::scale_free(alpha),
            LearnerKind::DiscountedFtrl => {
                let b1 = self.beta1.ok_or_else(|| OluError::config("discounted_ftrl needs beta1"))?;
                LearnerConfig::discounted(alpha, b1, self.beta2.unwrap_or(b1))
            }
            LearnerKind::DiscountedFtrlClipped => {
                let b1 = self.beta1.ok_or_else(|| OluError::config("clipped learner needs beta1"))?;
                let d = self.clip_d.ok_or_else(|| OluError::config("clipped learner needs clipD"))?;
                LearnerConfig {
                    beta2: self.beta2.unwrap_or(b1),
                    ..LearnerConfig::clipped(alpha, b1, d)
                }
            }
        };
        if self.kind != LearnerKind::Ogd && (self.eta.is_some() || self.domain.is_some()) {
            return Err(OluError::config(format!("{} takes no eta/domain", self.kind)));
        }
        if !self.kind.is_discounted() && (self.beta1.is_some() || self.beta2.is_some()) {
            return Err(OluError::config(format!("{} takes no discount factors", self.kind)));
        }
        if self.kind != LearnerKind::DiscountedFtrlClipped && self.clip_d.is_some() {
            return Err(OluError::config(format!("{} takes no clipD", self.kind)));
        }
        config.validate()?;
        Ok((config, conversion))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(config: LearnerConfig<f64>, v: &[f64]) -> Vec<f64> {
        play_stream(&config, v).unwrap()
    }

    #[test]
    fn every_kind_starts_at_zero() {
        for cfg in [
            LearnerConfig::scale_free(1.0),
            LearnerConfig::discounted(1.0, 0.9, 0.9),
            LearnerConfig::ogd(0.1, None),
            LearnerConfig::sgd(1.0),
            LearnerConfig::adagrad(1.0),
            LearnerConfig::clipped(1.0, 0.9, 1.0),
        ] {
            assert_eq!(Learner::new(cfg).unwrap().play(), 0.0);
        }
    }

    #[test]
    fn scale_free_examples() {
        assert_eq!(run(LearnerConfig::scale_free(2.0), &[1.0])[1], -2.0);
        let p = run(LearnerConfig::scale_free(1.0), &[1.0, 1.0]);
        assert!((p[2] + 2.0_f64.sqrt()).abs() < 1e-15);
        assert_eq!(run(LearnerConfig::scale_free(1.0), &[1.0, -1.0])[2], 0.0);
    }

    #[test]
    fn discounted_example() {
        let p = run(LearnerConfig::discounted(1.0, 0.5, 0.5), &[1.0, 1.0]);
        assert!((p[2] + 1.5 / 1.25_f64.sqrt()).abs() < 1e-15);
        assert!((p[2] + 1.341_640_786_499_874).abs() < 1e-12);
    }

    #[test]
    fn clipped_example() {
        let p = run(LearnerConfig::clipped(1.0, 1.0, 1.0), &[1.0, 1.0]);
        assert_eq!(p[2], -1.0);
    }

    #[test]
    fn adagrad_example() {
        let p = run(LearnerConfig::adagrad(1.0), &[3.0, 4.0]);
        assert!((p[2] + 0.8).abs() < 1e-15);
    }

    #[test]
    fn ogd_projects_onto_domain() {
        let p = run(LearnerConfig::ogd(1.0, Some(0.5)), &[1.0, 1.0, -3.0]);
        assert_eq!(p, vec![0.0, -0.5, -0.5, 0.5]);
        let p = run(LearnerConfig::ogd(0.5, None), &[1.0, 1.0]);
        assert_eq!(p, vec![0.0, -0.5, -1.0]);
    }

    #[test]
    fn zero_losses_give_zero_plays() {
        for kind in [LearnerConfig::scale_free(1.0), LearnerConfig::adagrad(1.0)] {
            assert!(run(kind, &[0.0; 5]).iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn schedule_inv_sqrt() {
        let s = AlphaSchedule::InvSqrt(2.0_f64);
        assert_eq!(s.at(4), 1.0);
        let cfg = LearnerConfig::sgd(1.0).with_schedule(AlphaSchedule::Custom(Arc::new(|t| t as f64)));
        assert_eq!(run(cfg, &[1.0, 1.0]), vec![0.0, -1.0, -2.0]);
    }

    #[test]
    fn scale_invariance_examples() {
        assert!(scale_invariance_check(&LearnerConfig::scale_free(1.0), &[1.0, -2.0, 3.0], 10.0).unwrap());
        assert!(scale_invariance_check(&LearnerConfig::scale_free(1.0), &[1.0, 1.0], 1.0).unwrap());
        // SGD is not scale free
        assert!(!scale_invariance_check(&LearnerConfig::sgd(1.0), &[1.0, -2.0], 10.0).unwrap());
        assert!(scale_invariance_check(&LearnerConfig::sgd(1.0), &[1.0], 0.0).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(Learner::new(LearnerConfig::scale_free(0.0)).is_err());
        assert!(Learner::new(LearnerConfig::discounted(1.0, 1.2, 0.9)).is_err());
        let mut bad = LearnerConfig::sgd(1.0);
        bad.beta1 = 0.5;
        assert!(bad.validate().is_err());
        let mut bad = LearnerConfig::clipped(1.0, 0.9, 1.0);
        bad.clip = None;
        assert!(bad.validate().is_err());
    }

    #[test]
    fn gamma_conversion() {
        let a = alpha_from_gamma(0.01_f64, 0.9, 0.99).unwrap();
        assert!((a - 0.01 * 0.1 / (1.0 - 0.9801_f64).sqrt()).abs() < 1e-15);
        assert!(alpha_from_gamma(0.01_f64, 0.9, 1.0).is_err());
    }

    #[test]
    fn spec_parses_from_json() {
        let spec: LearnerSpec =
            serde_json::from_str(r#"{"kind":"discounted_ftrl","gamma":0.01,"beta1":0.9,"beta2":0.99}"#).unwrap();
        let (cfg, conv) = spec.resolve().unwrap();
        assert_eq!(cfg.kind, LearnerKind::DiscountedFtrl);
        assert!(conv.is_some());
        let spec: LearnerSpec =
            serde_json::from_str(r#"{"kind":"discounted_ftrl_clipped","alpha":1,"beta1":0.9,"clipD":1}"#).unwrap();
        assert_eq!(spec.resolve().unwrap().0.clip, Some(1.0));
        let spec: LearnerSpec = serde_json::from_str(r#"{"kind":"sgd","alpha":1,"beta1":0.9}"#).unwrap();
        assert!(spec.resolve().is_err());
        assert!(serde_json::from_str::<LearnerSpec>(r#"{"kind":"sgd","alpha":1,"bogus":1}"#).is_err());
    }

    #[test]
    fn vector_learner_is_coordinatewise() {
        let mut v = VectorLearner::new(&LearnerConfig::scale_free(1.0), 2).unwrap();
        let p = v.step(&[1.0, -1.0]).unwrap();
        assert_eq!(p, vec![-1.0, 1.0]);
        assert!(v.step(&[1.0]).is_err());
    }
}
