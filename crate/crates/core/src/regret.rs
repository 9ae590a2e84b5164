//! Regret accounting for 1-D online linear optimization.
//!
//! Indexing follows the protocol: the learner plays `Δ_{t−1}`, then `v_t` is
//! revealed. With comparators `u_0..u_{T−1}`:
//!
//! ```text
//! dynamic regret     R_T(u_{0:T−1}) = Σ_{t=1}^T v_t (Δ_{t−1} − u_{t−1})
//! discounted regret  R_{T;β}(u)      = Σ_{t=1}^T β^{T−t} v_t (Δ_{t−1} − u)
//! ```
//!
//! `R_{0;β} = 0`. The discounted regret is affine in `u`:
//! `R_{t;β}(u) = A_t − u·B_t` with `A_t = β A_{t−1} + v_t Δ_{t−1}` and
//! `B_t = β B_{t−1} + v_t`, which is how every prefix is evaluated here.

use serde::{Deserialize, Serialize};

use crate::error::{OluError, Result};
use crate::learners::{play_stream, LearnerConfig};
use crate::moments::check_discount;
use crate::rng::SeededRng;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct RegretLedger<S> {
    losses: Vec<S>,
    plays: Vec<S>,
    comparators: Vec<S>,
    final_play: Option<S>,
}

impl<S: Scalar> RegretLedger<S> {
    /// `losses = v_1..v_T`, `plays = Δ_0..Δ_{T−1}`, `comparators = u_0..u_{T−1}`.
    pub fn new(losses: Vec<S>, plays: Vec<S>, comparators: Vec<S>) -> Result<Self> {
        let t = losses.len();
        if plays.len() != t || comparators.len() != t {
            return Err(OluError::Misaligned(format!(
                "losses {t}, plays {}, comparators {}",
                plays.len(),
                comparators.len()
            )));
        }
        for (what, xs) in [("loss", &losses), ("play", &plays), ("comparator", &comparators)] {
            if let Some(i) = xs.iter().position(|x| !x.is_finite()) {
                return Err(OluError::NonFinite { what, index: i });
            }
        }
        Ok(Self {
            losses,
            plays,
            comparators,
            final_play: None,
        })
    }

    /// Attaches `Δ_T`, the play made after the last loss.
    pub fn with_final_play(mut self, play: S) -> Self {
        self.final_play = Some(play);
        self
    }

    /// Runs `config` on `losses` and records its plays, including `Δ_T`.
    pub fn from_learner(config: &LearnerConfig<S>, losses: Vec<S>, comparators: Vec<S>) -> Result<Self> {
        let mut plays = play_stream(config, &losses)?;
        let last = plays.pop().expect("play_stream returns T + 1 plays");
        Ok(Self::new(losses, plays, comparators)?.with_final_play(last))
    }

    pub fn horizon(&self) -> usize {
        self.losses.len()
    }

    pub fn losses(&self) -> &[S] {
        &self.losses
    }

    pub fn plays(&self) -> &[S] {
        &self.plays
    }

    pub fn comparators(&self) -> &[S] {
        &self.comparators
    }

    pub fn final_play(&self) -> Option<S> {
        self.final_play
    }

    /// `Δ_t` for `0 ≤ t ≤ T`.
    pub fn play(&self, t: usize) -> Result<S> {
        match t.cmp(&self.horizon()) {
            std::cmp::Ordering::Less => Ok(self.plays[t]),
            std::cmp::Ordering::Equal => self
                .final_play
                .ok_or_else(|| OluError::Unsupported("ledger has no final play Δ_T".into())),
            std::cmp::Ordering::Greater => Err(OluError::OutOfRange {
                what: "t",
                value: t,
                lo: 0,
                hi: self.horizon(),
            }),
        }
    }

    /// `max_{t∈[1,T]} |Δ_t|`.
    pub fn max_play(&self, horizon: usize) -> Result<S> {
        self.check_horizon(horizon)?;
        (1..=horizon).try_fold(S::zero(), |m, t| Ok(m.max(self.play(t)?.abs())))
    }

    /// `G = max_t |v_t|`.
    pub fn g_max(&self) -> S {
        self.losses.iter().fold(S::zero(), |m, v| m.max(v.abs()))
    }

    /// `P = Σ_{t=1}^{T−1} |u_t − u_{t−1}|`.
    pub fn path_length(&self) -> S {
        self.comparators
            .windows(2)
            .fold(S::zero(), |p, w| p + (w[1] - w[0]).abs())
    }

    pub fn comparator_bound(&self) -> S {
        self.comparators.iter().fold(S::zero(), |m, u| m.max(u.abs()))
    }

    /// `Σ v_t (Δ_{t−1} − u_{t−1})`.
    pub fn dynamic_regret(&self) -> S {
        self.losses
            .iter()
            .zip(&self.plays)
            .zip(&self.comparators)
            .fold(S::zero(), |acc, ((&v, &d), &u)| acc + v * (d - u))
    }

    /// `Σ v_t (Δ_{t−1} − u)`.
    pub fn static_regret(&self, u: S) -> S {
        self.losses
            .iter()
            .zip(&self.plays)
            .fold(S::zero(), |acc, (&v, &d)| acc + v * (d - u))
    }

    /// Total loss of the learner, `Σ v_t Δ_{t−1}`.
    pub fn total_loss(&self) -> S {
        self.losses
            .iter()
            .zip(&self.plays)
            .fold(S::zero(), |acc, (&v, &d)| acc + v * d)
    }

    /// `Σ v_t u_{t−1}`.
    pub fn comparator_loss(&self) -> S {
        self.losses
            .iter()
            .zip(&self.comparators)
            .fold(S::zero(), |acc, (&v, &u)| acc + v * u)
    }

    fn check_horizon(&self, horizon: usize) -> Result<()> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(OluError::OutOfRange {
                what: "T",
                value: horizon,
                lo: 1,
                hi: self.horizon(),
            });
        }
        Ok(())
    }

    /// `(A_t, B_t)` for `t = 0..=T`, so that `R_{t;β}(u) = A_t − u B_t`.
    pub fn discounted_prefixes(&self, beta: S) -> (Vec<S>, Vec<S>) {
        let n = self.horizon();
        let mut a = Vec::with_capacity(n + 1);
        let mut b = Vec::with_capacity(n + 1);
        a.push(S::zero());
        b.push(S::zero());
        for t in 0..n {
            a.push(beta * a[t] + self.losses[t] * self.plays[t]);
            b.push(beta * b[t] + self.losses[t]);
        }
        (a, b)
    }

    /// `R_{T;β}(u) = Σ_{t≤T} β^{T−t} v_t (Δ_{t−1} − u)`.
    pub fn discounted_regret(&self, u: S, beta: S, horizon: usize) -> Result<S> {
        check_discount("beta", beta)?;
        self.check_horizon(horizon)?;
        Ok(self.losses[..horizon]
            .iter()
            .zip(&self.plays)
            .fold(S::zero(), |acc, (&v, &d)| beta * acc + v * (d - u)))
    }
}

/// Interval partition `[a_1,b_1] ∪ … ∪ [a_N,b_N]` of `[1,T]` with a
/// representative comparator `ū_i` per interval.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition<S> {
    intervals: Vec<(usize, usize)>,
    reps: Vec<S>,
}

impl<S: Scalar> Partition<S> {
    pub fn new(intervals: Vec<(usize, usize)>, reps: Vec<S>, horizon: usize, bound: Option<S>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(OluError::InvalidPartition("no intervals".into()));
        }
        if intervals.len() != reps.len() {
            return Err(OluError::InvalidPartition(format!(
                "{} intervals but {} representatives",
                intervals.len(),
                reps.len()
            )));
        }
        if intervals[0].0 != 1 {
            return Err(OluError::InvalidPartition("first interval must start at 1".into()));
        }
        if intervals[intervals.len() - 1].1 != horizon {
            return Err(OluError::InvalidPartition(format!("last interval must end at T = {horizon}")));
        }
        for (i, &(a, b)) in intervals.iter().enumerate() {
            if a > b {
                return Err(OluError::InvalidPartition(format!("empty interval [{a}, {b}]")));
            }
            if i + 1 < intervals.len() && intervals[i + 1].0 != b + 1 {
                return Err(OluError::InvalidPartition(format!("gap or overlap after [{a}, {b}]")));
            }
        }
        if let Some(i) = reps.iter().position(|r| !r.is_finite()) {
            return Err(OluError::NonFinite { what: "representative", index: i });
        }
        if let Some(u) = bound {
            if reps.iter().any(|r| r.abs() > u) {
                return Err(OluError::InvalidPartition("representative exceeds bound".into()));
            }
        }
        Ok(Self { intervals, reps })
    }

    /// `∪_t {t}` with `ū_t` given per step.
    pub fn singletons(reps: Vec<S>) -> Result<Self> {
        let n = reps.len();
        Self::new((1..=n).map(|t| (t, t)).collect(), reps, n, None)
    }

    /// A single interval `[1, T]` with representative `u`.
    pub fn whole(horizon: usize, u: S) -> Result<Self> {
        Self::new(vec![(1, horizon)], vec![u], horizon, None)
    }

    /// Cuts after each `t < T` independently with probability `p_cut`;
    /// representatives uniform on `[−bound, bound]`.
    pub fn random(horizon: usize, p_cut: f64, bound: f64, rng: &mut SeededRng) -> Result<Self> {
        if horizon == 0 {
            return Err(OluError::InvalidPartition("empty horizon".into()));
        }
        let mut intervals = Vec::new();
        let mut start = 1;
        for t in 1..horizon {
            if rng.bernoulli(p_cut) {
                intervals.push((start, t));
                start = t + 1;
            }
        }
        intervals.push((start, horizon));
        let reps = intervals.iter().map(|_| S::lit(rng.uniform_in(-bound, bound))).collect();
        Self::new(intervals, reps, horizon, None)
    }

    pub fn intervals(&self) -> &[(usize, usize)] {
        &self.intervals
    }

    pub fn reps(&self) -> &[S] {
        &self.reps
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }
}

/// The four terms of the discounted-to-dynamic conversion.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConversionTerms<S> {
    /// `β R_{T;β}(ū_N)`
    pub final_discounted: S,
    /// `(1−β) Σ_i Σ_{t∈[a_i,b_i]} R_{t;β}(ū_i)`
    pub aggregated_discounted: S,
    /// `β Σ_{i<N} (Σ_{t≤b_i} β^{b_i−t} v_t)(ū_{i+1} − ū_i)`
    pub inter_partition: S,
    /// `Σ_i Σ_{t∈[a_i,b_i]} v_t (ū_i − u_{t−1})`
    pub intra_partition: S,
}

impl<S: Scalar> ConversionTerms<S> {
    pub fn total(&self) -> S {
        self.final_discounted + self.aggregated_discounted + self.inter_partition + self.intra_partition
    }
}

/// Evaluates each term of the conversion identity separately.
pub fn conversion_terms<S: Scalar>(
    ledger: &RegretLedger<S>,
    partition: &Partition<S>,
    beta: S,
) -> Result<ConversionTerms<S>> {
    check_discount("beta", beta)?;
    let horizon = ledger.horizon();
    let last = partition.intervals.last().map(|iv| iv.1);
    if last != Some(horizon) {
        return Err(OluError::InvalidPartition(format!(
            "partition ends at {last:?}, ledger horizon is {horizon}"
        )));
    }
    let (a, b) = ledger.discounted_prefixes(beta);
    let regret_at = |t: usize, u: S| a[t] - u * b[t];
    let reps = &partition.reps;
    let n = reps.len();

    let final_discounted = beta * regret_at(horizon, reps[n - 1]);
    let mut aggregated = S::zero();
    let mut intra = S::zero();
    for (&(lo, hi), &rep) in partition.intervals.iter().zip(reps) {
        for t in lo..=hi {
            aggregated = aggregated + regret_at(t, rep);
            intra = intra + ledger.losses[t - 1] * (rep - ledger.comparators[t - 1]);
        }
    }
    let inter = partition
        .intervals
        .iter()
        .zip(reps.windows(2))
        .fold(S::zero(), |acc, (&(_, hi), w)| acc + b[hi] * (w[1] - w[0]));
    Ok(ConversionTerms {
        final_discounted,
        aggregated_discounted: (S::one() - beta) * aggregated,
        inter_partition: beta * inter,
        intra_partition: intra,
    })
}

/// Right-hand side of the discounted-to-dynamic conversion. Equals
/// [`RegretLedger::dynamic_regret`] for every ledger, partition,
/// representatives and `β ∈ (0, 1]`.
pub fn conversion_rhs<S: Scalar>(ledger: &RegretLedger<S>, partition: &Partition<S>, beta: S) -> Result<S> {
    Ok(conversion_terms(ledger, partition, beta)?.total())
}

/// Both sides of the subinterval identity
/// `Σ_{t=a}^b v_t(Δ_{t−1}−u) = (1−β) Σ_{t=a}^b R_{t;β}(u) + β (R_{b;β}(u) − R_{a−1;β}(u))`.
pub fn subinterval_identity<S: Scalar>(
    ledger: &RegretLedger<S>,
    lo: usize,
    hi: usize,
    u: S,
    beta: S,
) -> Result<(S, S)> {
    check_discount("beta", beta)?;
    if lo == 0 || lo > hi || hi > ledger.horizon() {
        return Err(OluError::InvalidPartition(format!("bad subinterval [{lo}, {hi}]")));
    }
    let lhs = (lo..=hi).fold(S::zero(), |acc, t| {
        acc + ledger.losses[t - 1] * (ledger.plays[t - 1] - u)
    });
    let (a, b) = ledger.discounted_prefixes(beta);
    let r = |t: usize| a[t] - u * b[t];
    let sum = (lo..=hi).fold(S::zero(), |acc, t| acc + r(t));
    let rhs = (S::one() - beta) * sum + beta * (r(hi) - r(lo - 1));
    Ok((lhs, rhs))
}

/// A bound evaluated on a ledger next to the quantity it bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub bound_name: String,
    pub value: f64,
    pub regret: f64,
    pub slack: f64,
}

impl BoundReport {
    pub fn new(name: &str, value: f64, regret: f64) -> Self {
        Self {
            bound_name: name.to_owned(),
            value,
            regret,
            slack: value - regret,
        }
    }

    pub fn holds(&self) -> bool {
        self.regret <= self.value
    }
}

fn sqrt2<S: Scalar>() -> S {
    S::lit(std::f64::consts::SQRT_2)
}

fn require_discount_below_one<S: Scalar>(beta: S) -> Result<()> {
    check_discount("beta", beta)?;
    if beta >= S::one() {
        return Err(OluError::config("this bound requires beta < 1"));
    }
    Ok(())
}

/// Static regret bound of scale-free FTRL with scale `α`:
/// `(u²/(2α) + √2 α) sqrt(Σ v_t²) + 2 max_{t∈[1,T]}|Δ_t| · max_t |v_t|`.
pub fn bound_static_scale_free<S: Scalar>(ledger: &RegretLedger<S>, alpha: S, u: S) -> Result<S> {
    bound_discounted(ledger, alpha, u, S::one(), ledger.horizon())
}

/// Discounted regret bound of discounted FTRL (`β1 = β2 = β`), valid for every prefix `T`:
/// `(u²/(2α) + √2 α) sqrt(V_β(v_{1:T})) + 2 max_{t∈[1,T]}|Δ_t| · max_{t∈[1,T]} |β^{T−t} v_t|`.
pub fn bound_discounted<S: Scalar>(ledger: &RegretLedger<S>, alpha: S, u: S, beta: S, horizon: usize) -> Result<S> {
    check_discount("beta", beta)?;
    if !(alpha > S::zero()) {
        return Err(OluError::config("alpha must be positive"));
    }
    let max_play = ledger.max_play(horizon)?;
    let mut weight = S::one();
    let mut variance = S::zero();
    let mut max_weighted = S::zero();
    for &v in ledger.losses[..horizon].iter().rev() {
        let x = weight * v;
        variance = variance + x * x;
        max_weighted = max_weighted.max(x.abs());
        weight = weight * beta;
    }
    let two = S::lit(2.0);
    Ok((u * u / (two * alpha) + sqrt2::<S>() * alpha) * variance.sqrt() + two * max_play * max_weighted)
}

/// Dynamic regret bound of discounted FTRL on an unbounded domain, with
/// `M` the ratio of [`crate::moments::m_ratio`] and `|u_t| ≤ α M`:
///
/// ```text
/// (α M²/2 + √2 α)(G/√(1−β) + √(1−β) G T) + 2 α M G (1 + (1−β) T) + M G P / √(1−β)
/// ```
pub fn bound_dynamic_unbounded<S: Scalar>(ledger: &RegretLedger<S>, alpha: S, beta: S, m: S) -> Result<S> {
    require_discount_below_one(beta)?;
    let radius = alpha * m;
    let slack = S::lit(1e-12) * (S::one() + radius);
    if ledger.comparator_bound() > radius + slack {
        return Err(OluError::config("comparators must satisfy |u_t| <= alpha * M"));
    }
    let g = ledger.g_max();
    let p = ledger.path_length();
    let t = S::from_usize_lossy(ledger.horizon());
    let gap = S::one() - beta;
    let root = gap.sqrt();
    let two = S::lit(2.0);
    Ok((alpha * m * m / two + sqrt2::<S>() * alpha) * (g / root + root * g * t)
        + two * alpha * m * g * (S::one() + gap * t)
        + m * g * p / root)
}

/// Dynamic regret bound of clipped discounted FTRL with `α = D`, `|u_t| ≤ D`:
/// `4 D G (1/√(1−β) + √(1−β) T) + G P / (1−β)`.
pub fn bound_dynamic_clipped<S: Scalar>(ledger: &RegretLedger<S>, bound: S, beta: S) -> Result<S> {
    require_discount_below_one(beta)?;
    let slack = S::lit(1e-12) * (S::one() + bound);
    if ledger.comparator_bound() > bound + slack {
        return Err(OluError::config("comparators must satisfy |u_t| <= D"));
    }
    let g = ledger.g_max();
    let p = ledger.path_length();
    let t = S::from_usize_lossy(ledger.horizon());
    let gap = S::one() - beta;
    let root = gap.sqrt();
    Ok(S::lit(4.0) * bound * g * (S::one() / root + root * t) + g * p / gap)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ledger(v: &[f64], d: &[f64], u: &[f64]) -> RegretLedger<f64> {
        RegretLedger::new(v.to_vec(), d.to_vec(), u.to_vec()).unwrap()
    }

    #[test]
    fn dynamic_regret_examples() {
        assert_eq!(ledger(&[1.0], &[0.0], &[-1.0]).dynamic_regret(), 1.0);
        let l = ledger(&[1.0, -2.0, 3.0], &[0.5, 1.0, -1.0], &[0.5, 1.0, -1.0]);
        assert_eq!(l.dynamic_regret(), 0.0);
    }

    #[test]
    fn misaligned_ledger_rejected() {
        assert!(RegretLedger::new(vec![1.0], vec![], vec![0.0]).is_err());
    }

    #[test]
    fn discounted_regret_examples() {
        let l = ledger(&[1.0, 1.0], &[0.0, -1.0], &[0.0, 0.0]);
        assert_eq!(l.discounted_regret(0.0, 0.5, 2).unwrap(), -1.0);
        assert_eq!(l.discounted_regret(0.3, 1.0, 2).unwrap(), l.static_regret(0.3));
        let zeros = ledger(&[0.0; 3], &[1.0, 2.0, 3.0], &[0.0; 3]);
        assert_eq!(zeros.discounted_regret(1.0, 0.7, 3).unwrap(), 0.0);
        assert!(l.discounted_regret(0.0, 0.5, 3).is_err());
        assert!(l.discounted_regret(0.0, 0.5, 0).is_err());
    }

    #[test]
    fn path_length_and_g() {
        let l = ledger(&[1.0, -3.0, 2.0], &[0.0; 3], &[1.0, -1.0, -1.0]);
        assert_eq!(l.path_length(), 2.0);
        assert_eq!(l.g_max(), 3.0);
        assert_eq!(ledger(&[1.0; 3], &[0.0; 3], &[0.4; 3]).path_length(), 0.0);
    }

    #[test]
    fn partition_validation() {
        assert!(Partition::new(vec![(1, 2), (3, 4)], vec![0.0, 1.0], 4, None).is_ok());
        assert!(Partition::new(vec![(1, 2), (4, 4)], vec![0.0, 1.0], 4, None).is_err());
        assert!(Partition::new(vec![(2, 4)], vec![0.0], 4, None).is_err());
        assert!(Partition::new(vec![(1, 3)], vec![0.0], 4, None).is_err());
        assert!(Partition::new(vec![(1, 4)], vec![0.0, 1.0], 4, None).is_err());
        assert!(Partition::new(vec![(1, 4)], vec![2.0], 4, Some(1.0)).is_err());
    }

    #[test]
    fn whole_interval_at_unit_discount_is_static_regret() {
        let l = ledger(&[1.0, -0.5, 2.0], &[0.1, 0.2, -0.3], &[0.7; 3]);
        let p = Partition::whole(3, 0.7).unwrap();
        let rhs = conversion_rhs(&l, &p, 1.0).unwrap();
        assert!((rhs - l.static_regret(0.7)).abs() < 1e-14);
    }

    #[test]
    fn singleton_partition_has_no_intra_term() {
        let l = ledger(&[1.0, -0.5, 2.0], &[0.1, 0.2, -0.3], &[0.7, -0.2, 0.1]);
        let p = Partition::singletons(l.comparators().to_vec()).unwrap();
        let terms = conversion_terms(&l, &p, 0.9).unwrap();
        assert_eq!(terms.intra_partition, 0.0);
        assert!((terms.total() - l.dynamic_regret()).abs() < 1e-14);
    }

    #[test]
    fn partition_must_cover_ledger() {
        let l = ledger(&[1.0, 2.0], &[0.0; 2], &[0.0; 2]);
        let p = Partition::whole(3, 0.0).unwrap();
        assert!(conversion_rhs(&l, &p, 0.5).is_err());
    }

    #[test]
    fn bounds_vanish_on_zero_losses() {
        let l = ledger(&[0.0; 4], &[0.0; 4], &[0.0; 4]).with_final_play(0.0);
        assert_eq!(bound_dynamic_unbounded(&l, 1.0, 0.9, 0.0).unwrap(), 0.0);
        assert_eq!(bound_dynamic_clipped(&l, 1.0, 0.9).unwrap(), 0.0);
        assert_eq!(bound_discounted(&l, 1.0, 0.0, 0.5, 4).unwrap(), 0.0);
        assert!(bound_dynamic_clipped(&l, 1.0, 1.0).is_err());
        assert!(bound_dynamic_unbounded(&l, 1.0, 1.0, 0.0).is_err());
    }

    #[test]
    fn single_step_static_bound() {
        let l = RegretLedger::from_learner(&LearnerConfig::scale_free(1.0), vec![1.0], vec![0.0]).unwrap();
        assert_eq!(l.final_play(), Some(-1.0));
        let b = bound_static_scale_free(&l, 1.0, 0.0).unwrap();
        assert!((b - (2.0_f64.sqrt() + 2.0)).abs() < 1e-15);
        assert!(l.static_regret(0.0) <= b);
    }

    #[test]
    fn discounted_bound_at_unit_discount_is_static_bound() {
        let l = RegretLedger::from_learner(&LearnerConfig::scale_free(0.5), vec![1.0, -2.0, 0.5], vec![0.0; 3])
            .unwrap();
        assert_eq!(
            bound_discounted(&l, 0.5, 0.3, 1.0, 3).unwrap(),
            bound_static_scale_free(&l, 0.5, 0.3).unwrap()
        );
    }

    #[test]
    fn missing_final_play_is_reported() {
        let l = ledger(&[1.0], &[0.0], &[0.0]);
        assert!(bound_static_scale_free(&l, 1.0, 0.0).is_err());
    }

    #[test]
    fn comparator_radius_enforced() {
        let l = ledger(&[1.0, 1.0], &[0.0, -1.0], &[2.0, 2.0]).with_final_play(-1.0);
        assert!(bound_dynamic_clipped(&l, 1.0, 0.5).is_err());
        assert!(bound_dynamic_unbounded(&l, 1.0, 0.5, 1.0).is_err());
    }
}
