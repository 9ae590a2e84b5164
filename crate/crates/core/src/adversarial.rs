//! The two-dimensional lower-bound instance for no-momentum and undiscounted
//! learners, plus regret sweeps over the horizon.
//!
//! With `T̂` the largest multiple of 4 not above `T`:
//!
//! ```text
//! t ≤ T̂/2:       v_t = (1,0) for even t, (0,1) for odd t
//! T̂/2 < t ≤ T̂:   v_t = −(1,0) for even t, −(0,1) for odd t
//! t > T̂:         v_t = (0,0)
//! u_t = (−1,−1) for t ≤ T̂/2 − 1, (1,1) afterwards
//! ```
//!
//! Consecutive losses never share a coordinate, so any learner whose play is
//! a multiple of the last loss earns exactly zero, while the comparator earns
//! `−T̂`.

use serde::{Deserialize, Serialize};

use crate::error::{OluError, Result};
use crate::learners::LearnerConfig;
use crate::regret::RegretLedger;
use crate::scalar::Scalar;
use crate::stream::{ComparatorSequence, LossSequence};

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundInstance<S> {
    pub losses: LossSequence<S>,
    pub comparators: ComparatorSequence<S>,
    pub t_hat: usize,
}

impl<S: Scalar> LowerBoundInstance<S> {
    pub fn horizon(&self) -> usize {
        self.losses.horizon()
    }

    /// `Σ_t ⟨v_t, u_{t−1}⟩`.
    pub fn comparator_loss(&self) -> S {
        (1..=self.horizon()).fold(S::zero(), |acc, t| {
            let v = self.losses.at(t);
            let u = self.comparators.at(t - 1);
            acc + v[0] * u[0] + v[1] * u[1]
        })
    }

    /// Coordinate-wise comparator path lengths.
    pub fn path_lengths(&self) -> [S; 2] {
        [self.comparators.path_length(0), self.comparators.path_length(1)]
    }
}

/// Largest multiple of 4 not above `horizon`.
pub fn padded_horizon(horizon: usize) -> usize {
    horizon - horizon % 4
}

pub fn make_lower_bound<S: Scalar>(horizon: usize) -> Result<LowerBoundInstance<S>> {
    if horizon < 4 {
        return Err(OluError::OutOfRange { what: "T", value: horizon, lo: 4, hi: usize::MAX });
    }
    let t_hat = padded_horizon(horizon);
    let half = t_hat / 2;
    let (one, zero) = (S::one(), S::zero());
    let losses = (1..=horizon)
        .map(|t| {
            if t > t_hat {
                return vec![zero, zero];
            }
            let sign = if t <= half { one } else { -one };
            if t % 2 == 0 {
                vec![sign, zero]
            } else {
                vec![zero, sign]
            }
        })
        .collect();
    let comparators = (0..horizon)
        .map(|t| if t + 1 <= half { vec![-one, -one] } else { vec![one, one] })
        .collect();
    Ok(LowerBoundInstance {
        losses: LossSequence::new(losses)?,
        comparators: ComparatorSequence::new(comparators, Some(one))?,
        t_hat,
    })
}

/// True iff `v_t[i]·v_{t+1}[i] = 0` for every `i` and `t < T̂`.
pub fn assert_no_momentum_orthogonality<S: Scalar>(instance: &LowerBoundInstance<S>) -> bool {
    let last = instance.t_hat.min(instance.horizon());
    (1..last).all(|t| {
        let (a, b) = (instance.losses.at(t), instance.losses.at(t + 1));
        a.iter().zip(b).all(|(&x, &y)| x * y == S::zero())
    })
}

/// True iff `u_{t−1}` minimises `⟨v_t, ·⟩` over `[−1,1]²` for every `t ≤ T̂`.
pub fn assert_comparator_argmin<S: Scalar>(instance: &LowerBoundInstance<S>) -> bool {
    (1..=instance.t_hat).all(|t| {
        let v = instance.losses.at(t);
        let u = instance.comparators.at(t - 1);
        let attained = v[0] * u[0] + v[1] * u[1];
        let minimum = -(v[0].abs() + v[1].abs());
        attained == minimum && u.iter().all(|x| x.abs() <= S::one())
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineRow {
    pub learner: String,
    pub horizon: usize,
    pub total_loss: f64,
    pub dynamic_regret: f64,
}

fn coordinate_ledgers<S: Scalar>(
    instance: &LowerBoundInstance<S>,
    config: &LearnerConfig<S>,
) -> Result<[RegretLedger<S>; 2]> {
    let make = |i| {
        RegretLedger::from_learner(config, instance.losses.coordinate(i), instance.comparators.coordinate(i))
    };
    Ok([make(0)?, make(1)?])
}

/// Runs one coordinate-wise learner on the instance.
pub fn measure<S: Scalar>(instance: &LowerBoundInstance<S>, name: &str, config: &LearnerConfig<S>) -> Result<BaselineRow> {
    let [a, b] = coordinate_ledgers(instance, config)?;
    Ok(BaselineRow {
        learner: name.to_string(),
        horizon: instance.horizon(),
        total_loss: (a.total_loss() + b.total_loss()).as_f64(),
        dynamic_regret: (a.dynamic_regret() + b.dynamic_regret()).as_f64(),
    })
}

pub fn measure_baselines<S: Scalar>(
    instance: &LowerBoundInstance<S>,
    configs: &[(String, LearnerConfig<S>)],
) -> Result<Vec<BaselineRow>> {
    configs.iter().map(|(name, cfg)| measure(instance, name, cfg)).collect()
}

/// `β = 1 − c·T^{−2/3}`, clamped into `(0, 1)`.
pub fn tuned_beta(c: f64, horizon: usize) -> f64 {
    let beta = 1.0 - c * (horizon as f64).powf(-2.0 / 3.0);
    beta.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON)
}

/// The learner families compared in a sweep.
#[derive(Debug, Clone)]
pub enum SweepFamily {
    Fixed { name: String, config: LearnerConfig<f64> },
    /// Clipped discounted FTRL with `β = 1 − c·T^{−2/3}`, reporting the best
    /// `c` of the grid at each horizon.
    TunedClipped { name: String, alpha: f64, bound: f64, c_grid: Vec<f64> },
}

impl SweepFamily {
    pub fn name(&self) -> &str {
        match self {
            Self::Fixed { name, .. } | Self::TunedClipped { name, .. } => name,
        }
    }
}

/// The three families of the lower-bound experiment with `α = D = 1`.
pub fn default_families(c_grid: &[f64]) -> Vec<SweepFamily> {
    vec![
        SweepFamily::Fixed { name: "adagrad".into(), config: LearnerConfig::adagrad(1.0) },
        SweepFamily::Fixed { name: "clipped_beta1".into(), config: LearnerConfig::clipped(1.0, 1.0, 1.0) },
        SweepFamily::TunedClipped {
            name: "tuned_clipped".into(),
            alpha: 1.0,
            bound: 1.0,
            c_grid: c_grid.to_vec(),
        },
    ]
}

pub const DEFAULT_C_GRID: [f64; 4] = [0.5, 1.0, 2.0, 4.0];

/// `2^8, …, 2^14`.
pub fn default_t_grid() -> Vec<usize> {
    (8..=14).map(|k| 1usize << k).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub learner: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub regret: f64,
    pub total_loss: f64,
    /// Selected `c` for tuned families.
    pub c: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    /// Per learner, the least-squares slope of `log regret` on `log T`;
    /// `None` with fewer than two horizons or a nonpositive regret.
    pub slopes: Vec<(String, Option<f64>)>,
}

impl SweepTable {
    pub fn slope(&self, learner: &str) -> Option<f64> {
        self.slopes.iter().find(|(n, _)| n == learner).and_then(|(_, s)| *s)
    }

    pub fn rows_for<'a>(&'a self, learner: &'a str) -> impl Iterator<Item = &'a SweepRow> + 'a {
        self.rows.iter().filter(move |r| r.learner == learner)
    }
}

/// Ordinary least-squares slope of `y` on `x`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn log_log_slope(rows: &[&SweepRow]) -> Option<f64> {
    if rows.iter().any(|r| !(r.regret > 0.0)) {
        return None;
    }
    let x: Vec<f64> = rows.iter().map(|r| (r.horizon as f64).ln()).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.regret.ln()).collect();
    least_squares_slope(&x, &y)
}

fn sweep_cell(instance: &LowerBoundInstance<f64>, family: &SweepFamily) -> Result<SweepRow> {
    let horizon = instance.horizon();
    match family {
        SweepFamily::Fixed { name, config } => {
            let row = measure(instance, name, config)?;
            Ok(SweepRow { learner: row.learner, horizon, regret: row.dynamic_regret, total_loss: row.total_loss, c: None })
        }
        SweepFamily::TunedClipped { name, alpha, bound, c_grid } => {
            if c_grid.is_empty() {
                return Err(OluError::config("empty c grid"));
            }
            let mut best: Option<SweepRow> = None;
            for &c in c_grid {
                let cfg = LearnerConfig::clipped(*alpha, tuned_beta(c, horizon), *bound);
                let row = measure(instance, name, &cfg)?;
                if best.as_ref().map_or(true, |b| row.dynamic_regret < b.regret) {
                    best = Some(SweepRow {
                        learner: name.clone(),
                        horizon,
                        regret: row.dynamic_regret,
                        total_loss: row.total_loss,
                        c: Some(c),
                    });
                }
            }
            Ok(best.expect("nonempty grid"))
        }
    }
}

/// Dynamic regret of each family on `make_lower_bound(T)` for every `T` in the grid.
///
/// Cells are independent and run on scoped threads.
pub fn scaling_sweep(t_grid: &[usize], families: &[SweepFamily]) -> Result<SweepTable> {
    if t_grid.is_empty() || families.is_empty() {
        return Err(OluError::config("sweep needs at least one horizon and one learner"));
    }
    if t_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(OluError::config("T grid must be strictly increasing"));
    }
    let instances = t_grid.iter().map(|&t| make_lower_bound::<f64>(t)).collect::<Result<Vec<_>>>()?;
    let cells: Vec<(usize, usize)> =
        (0..families.len()).flat_map(|f| (0..instances.len()).map(move |k| (f, k))).collect();
    let results: Vec<Result<SweepRow>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cells
            .iter()
            .map(|&(f, k)| {
                let (inst, fam) = (&instances[k], &families[f]);
                scope.spawn(move || sweep_cell(inst, fam))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("sweep worker panicked")).collect()
    });
    let rows = results.into_iter().collect::<Result<Vec<_>>>()?;
    let slopes = families
        .iter()
        .map(|fam| {
            let mine: Vec<&SweepRow> = rows.iter().filter(|r| r.learner == fam.name()).collect();
            (fam.name().to_string(), log_log_slope(&mine))
        })
        .collect();
    Ok(SweepTable { rows, slopes })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn four_step_instance_by_hand() {
        let inst = make_lower_bound::<f64>(4).unwrap();
        let v: Vec<Vec<f64>> = inst.losses.iter().map(<[f64]>::to_vec).collect();
        assert_eq!(v, vec![vec![0.0, 1.0], vec![1.0, 0.0], vec![0.0, -1.0], vec![-1.0, 0.0]]);
        let u: Vec<Vec<f64>> = (0..4).map(|t| inst.comparators.at(t).to_vec()).collect();
        assert_eq!(u, vec![vec![-1.0, -1.0], vec![-1.0, -1.0], vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert_eq!(inst.comparator_loss(), -4.0);
    }

    #[test]
    fn padding_freezes_comparator() {
        let inst = make_lower_bound::<f64>(6).unwrap();
        assert_eq!(inst.t_hat, 4);
        assert_eq!(inst.losses.at(5), &[0.0, 0.0]);
        assert_eq!(inst.losses.at(6), &[0.0, 0.0]);
        assert_eq!(inst.comparators.at(4), inst.comparators.at(3));
        assert_eq!(inst.comparators.at(5), inst.comparators.at(3));
    }

    #[test]
    fn too_short_rejected() {
        assert!(make_lower_bound::<f64>(3).is_err());
    }

    #[test]
    fn corrupted_instance_fails_orthogonality() {
        let mut inst = make_lower_bound::<f64>(16).unwrap();
        assert!(assert_no_momentum_orthogonality(&inst));
        let mut v = inst.losses.clone().into_inner();
        v[2] = v[1].clone();
        inst.losses = LossSequence::new(v).unwrap();
        assert!(!assert_no_momentum_orthogonality(&inst));
    }

    #[test]
    fn adagrad_regret_is_t_hat() {
        let inst = make_lower_bound::<f64>(16).unwrap();
        let row = measure(&inst, "adagrad", &LearnerConfig::adagrad(1.0)).unwrap();
        assert_eq!(row.total_loss, 0.0);
        assert_eq!(row.dynamic_regret, 16.0);
    }

    #[test]
    fn slope_of_a_line() {
        let x = [0.0, 1.0, 2.0];
        let y = [1.0, 3.0, 5.0];
        assert!((least_squares_slope(&x, &y).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(least_squares_slope(&[1.0], &[1.0]), None);
    }

    #[test]
    fn sweep_rejects_degenerate_grids() {
        let fams = default_families(&DEFAULT_C_GRID);
        assert!(scaling_sweep(&[], &fams).is_err());
        assert!(scaling_sweep(&[64, 16], &fams).is_err());
        let one = scaling_sweep(&[64], &fams).unwrap();
        assert!(one.slopes.iter().all(|(_, s)| s.is_none()));
    }
}
