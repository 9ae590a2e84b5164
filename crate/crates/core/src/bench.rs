//! Sparse hinge-loss classification.
//!
//! Example `i` is `z_i = c_i e_i` with label `+1`, so the training loss
//! decouples per coordinate:
//!
//! ```text
//! F(w) = (1/d) Σ_i ℓ(c_i w_i),   ℓ(x) = max(0, 1 − x) + λ|x|
//! ```
//!
//! Each stochastic gradient touches one coordinate. SGD with a small step
//! moves a coordinate only when it is sampled, while a scale-free learner
//! keeps a per-coordinate step of order `α` regardless of how rarely (or at
//! what scale) its gradients arrive.

use serde::{Deserialize, Serialize};

use crate::driver::{run_observed, Objective, QueryMode, Recording, RunOptions};
use crate::error::{OluError, Result};
use crate::learners::{alpha_from_gamma, AlphaSchedule, LearnerConfig, VectorLearner};
use crate::rng::{SeededRng, STREAM_SCALES};

/// `max(0, 1 − x) + λ|x|`.
pub fn hinge_value(x: f64, lambda: f64) -> f64 {
    (1.0 - x).max(0.0) + lambda * x.abs()
}

/// A subgradient of [`hinge_value`]; `λ − 1` at the kink `x = 0` and `λ` at `x = 1`.
pub fn hinge_subgrad(x: f64, lambda: f64) -> f64 {
    if x < 0.0 {
        -1.0 - lambda
    } else if x < 1.0 {
        lambda - 1.0
    } else {
        lambda
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Setting {
    /// All scales equal to 1.
    #[default]
    Unit,
    /// Scales drawn from `Unif[0, 2]`.
    Scaled,
}

impl Setting {
    pub fn name(self) -> &'static str {
        match self {
            Setting::Unit => "unit",
            Setting::Scaled => "scaled",
        }
    }
}

impl std::str::FromStr for Setting {
    type Err = OluError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "unit" | "1" => Ok(Setting::Unit),
            "scaled" | "2" => Ok(Setting::Scaled),
            other => Err(OluError::config(format!("unknown setting {other:?} (expected unit or scaled)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub scales: Vec<f64>,
    pub lambda: f64,
}

impl Dataset {
    pub fn new(scales: Vec<f64>, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda < 1.0) {
            return Err(OluError::config(format!("lambda must lie in (0, 1), got {lambda}")));
        }
        if scales.is_empty() {
            return Err(OluError::config("dataset needs d > 0"));
        }
        if scales.iter().any(|c| !c.is_finite() || *c < 0.0) {
            return Err(OluError::config("scales must be finite and nonnegative"));
        }
        Ok(Self { scales, lambda })
    }

    /// Scales come from the `scales` stream of `seed`, independent of the data stream.
    pub fn build(setting: Setting, d: usize, lambda: f64, seed: u64) -> Result<Self> {
        let scales = match setting {
            Setting::Unit => vec![1.0; d],
            Setting::Scaled => {
                let mut rng = SeededRng::new(seed, STREAM_SCALES);
                (0..d).map(|_| rng.uniform_in(0.0, 2.0)).collect()
            }
        };
        Self::new(scales, lambda)
    }

    pub fn d(&self) -> usize {
        self.scales.len()
    }

    /// `F(w) = (1/d) Σ ℓ(c_i w_i)`.
    pub fn loss(&self, w: &[f64]) -> f64 {
        let total: f64 = self.scales.iter().zip(w).map(|(&c, &x)| hinge_value(c * x, self.lambda)).sum();
        total / self.d() as f64
    }

    /// The minimum of `F`. Each term with `c_i > 0` bottoms out at `λ`
    /// (at `w_i = 1/c_i`); a term with `c_i = 0` is constantly `ℓ(0) = 1`.
    pub fn optimum_value(&self) -> OptimumValue {
        let zero_scales = self.scales.iter().filter(|&&c| c == 0.0).count();
        let total: f64 = self.scales.iter().map(|&c| if c > 0.0 { self.lambda } else { 1.0 }).sum();
        OptimumValue { value: total / self.d() as f64, zero_scales }
    }

    /// Samples `i` uniformly and writes `c_i ℓ'(c_i w_i) e_i` into `out`.
    /// Returns the sampled index.
    pub fn sample_gradient(&self, w: &[f64], rng: &mut SeededRng, out: &mut [f64]) -> usize {
        let i = rng.index(self.d());
        out.fill(0.0);
        let c = self.scales[i];
        out[i] = c * hinge_subgrad(c * w[i], self.lambda);
        i
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptimumValue {
    pub value: f64,
    /// Number of examples with `c_i = 0`, whose loss cannot drop below 1.
    pub zero_scales: usize,
}

/// Free-function form of [`Dataset::optimum_value`].
pub fn optimum_value(dataset: &Dataset) -> f64 {
    dataset.optimum_value().value
}

pub fn stochastic_grad_classification(w: &[f64], dataset: &Dataset, rng: &mut SeededRng) -> Vec<f64> {
    let mut out = vec![0.0; dataset.d()];
    dataset.sample_gradient(w, rng, &mut out);
    out
}

impl Objective<f64> for Dataset {
    fn dim(&self) -> usize {
        self.d()
    }

    fn value(&self, w: &[f64]) -> f64 {
        self.loss(w)
    }

    fn stochastic_grad(&self, w: &[f64], rng: &mut SeededRng, out: &mut [f64]) {
        self.sample_gradient(w, rng, out);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub d: usize,
    pub lambda: f64,
    /// SGD step size.
    pub eta: f64,
    /// Scaled learning rate shared by every Adam-family arm.
    pub alpha: f64,
    /// Discounts of the Adam-family arms (`β1 = β2`); 1 gives scale-free FTRL.
    pub betas: Vec<f64>,
    /// Raw Adam step size. When set, each Adam arm uses the equivalent
    /// `α = γ(1 − β)/sqrt(1 − β²)` instead of `alpha`; needs every beta < 1.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub seeds: usize,
    pub base_seed: u64,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub eval_every: usize,
}

pub const DEFAULT_ADAM_ALPHA: f64 = 3e-4;
pub const DEFAULT_BETA: f64 = 0.995;

/// Default horizon per setting.
pub fn default_horizon(setting: Setting) -> usize {
    match setting {
        Setting::Unit => 10_000,
        Setting::Scaled => 20_000,
    }
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_setting(Setting::Unit)
    }
}

impl ExperimentConfig {
    pub fn for_setting(setting: Setting) -> Self {
        Self {
            setting,
            d: 100,
            lambda: 0.25,
            eta: 0.01,
            alpha: DEFAULT_ADAM_ALPHA,
            betas: vec![DEFAULT_BETA, 1.0],
            gamma: None,
            seeds: 5,
            base_seed: 0,
            horizon: default_horizon(setting),
            eval_every: 100,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 || self.horizon == 0 || self.seeds == 0 || self.eval_every == 0 {
            return Err(OluError::config("d, T, seeds and eval_every must be positive"));
        }
        if !(self.lambda > 0.0 && self.lambda < 1.0) {
            return Err(OluError::config(format!("lambda must lie in (0, 1), got {}", self.lambda)));
        }
        if !(self.eta >= 0.0 && self.eta.is_finite()) || !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(OluError::config("eta and alpha must be finite and nonnegative"));
        }
        if self.betas.iter().any(|&b| !(b > 0.0 && b <= 1.0)) {
            return Err(OluError::config("betas must lie in (0, 1]"));
        }
        if let Some(g) = self.gamma {
            for &b in &self.betas {
                alpha_from_gamma(g, b, b)?;
            }
        }
        Ok(())
    }

    /// `(label, learner)` for every arm: SGD first, then one Adam arm per beta.
    pub fn arms(&self) -> Result<Vec<(String, LearnerConfig<f64>)>> {
        // A zero rate is expressed as a schedule so that it bypasses the
        // positivity check on constant rates.
        let rate = |r: f64| {
            if r > 0.0 {
                AlphaSchedule::Constant(r)
            } else {
                AlphaSchedule::Custom(std::sync::Arc::new(|_| 0.0))
            }
        };
        let mut out = vec![("sgd".to_string(), LearnerConfig::sgd(1.0).with_schedule(rate(self.eta)))];
        for &b in &self.betas {
            let alpha = match self.gamma {
                Some(g) => alpha_from_gamma(g, b, b)?,
                None => self.alpha,
            };
            out.push((adam_label(b), LearnerConfig::discounted(1.0, b, b).with_schedule(rate(alpha))));
        }
        Ok(out)
    }
}

pub fn adam_label(beta: f64) -> String {
    format!("adam_beta={beta}")
}

/// First step at which each coordinate's margin `c_i w_i` exceeds 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TauStats {
    pub crossed: usize,
    pub d: usize,
    pub mean: Option<f64>,
    pub median: Option<f64>,
    pub max: Option<usize>,
}

impl TauStats {
    pub fn from_taus(taus: &[Option<usize>]) -> Self {
        let mut hit: Vec<usize> = taus.iter().flatten().copied().collect();
        hit.sort_unstable();
        let n = hit.len();
        let mean = (n > 0).then(|| hit.iter().sum::<usize>() as f64 / n as f64);
        let median = (n > 0).then(|| {
            if n % 2 == 1 {
                hit[n / 2] as f64
            } else {
                (hit[n / 2 - 1] + hit[n / 2]) as f64 / 2.0
            }
        });
        Self { crossed: n, d: taus.len(), mean, median, max: hit.last().copied() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRun {
    pub seed: u64,
    /// `F(w_t)` at each evaluation step.
    pub values: Vec<f64>,
    pub taus: Vec<Option<usize>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ArmResult {
    pub label: String,
    pub runs: Vec<SeedRun>,
}

impl ArmResult {
    fn column(&self, k: usize) -> impl Iterator<Item = f64> + '_ {
        self.runs.iter().map(move |r| r.values[k])
    }

    pub fn mean(&self) -> Vec<f64> {
        let n = self.runs.len() as f64;
        (0..self.runs[0].values.len()).map(|k| self.column(k).sum::<f64>() / n).collect()
    }

    pub fn min(&self) -> Vec<f64> {
        (0..self.runs[0].values.len()).map(|k| self.column(k).fold(f64::INFINITY, f64::min)).collect()
    }

    pub fn max(&self) -> Vec<f64> {
        (0..self.runs[0].values.len()).map(|k| self.column(k).fold(f64::NEG_INFINITY, f64::max)).collect()
    }

    pub fn final_mean(&self) -> f64 {
        *self.mean().last().expect("at least the t = 0 evaluation")
    }

    pub fn tau_stats(&self) -> TauStats {
        let all: Vec<Option<usize>> = self.runs.iter().flat_map(|r| r.taus.iter().copied()).collect();
        TauStats::from_taus(&all)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationResult {
    pub config: ExperimentConfig,
    pub f_star: f64,
    /// Evaluation steps shared by every trace.
    pub steps: Vec<usize>,
    pub arms: Vec<ArmResult>,
}

impl ClassificationResult {
    pub fn arm(&self, label: &str) -> Option<&ArmResult> {
        self.arms.iter().find(|a| a.label == label)
    }

    pub fn summary(&self) -> ClassificationSummary {
        ClassificationSummary {
            setting: self.config.setting,
            horizon: self.config.horizon,
            f_star: self.f_star,
            arms: self
                .arms
                .iter()
                .map(|a| ArmSummary {
                    label: a.label.clone(),
                    final_mean: a.final_mean(),
                    final_min: *a.min().last().expect("nonempty"),
                    final_max: *a.max().last().expect("nonempty"),
                    tau: a.tau_stats(),
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ArmSummary {
    pub label: String,
    pub final_mean: f64,
    pub final_min: f64,
    pub final_max: f64,
    pub tau: TauStats,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationSummary {
    pub setting: Setting,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub f_star: f64,
    pub arms: Vec<ArmSummary>,
}

impl ClassificationSummary {
    /// Mean final loss of the best discounted arm (`β < 1`), if any.
    pub fn best_discounted(&self) -> Option<&ArmSummary> {
        self.arms
            .iter()
            .filter(|a| a.label.starts_with("adam_beta=") && a.label != adam_label(1.0))
            .min_by(|a, b| a.final_mean.total_cmp(&b.final_mean))
    }

    pub fn get(&self, label: &str) -> Option<&ArmSummary> {
        self.arms.iter().find(|a| a.label == label)
    }
}

fn run_cell(
    dataset: &Dataset,
    config: &ExperimentConfig,
    learner: &LearnerConfig<f64>,
    seed: u64,
) -> Result<SeedRun> {
    let d = dataset.d();
    let mut vl = VectorLearner::new(learner, d)?;
    let options = RunOptions {
        // Convex objective: query at the new iterate.
        query: QueryMode::FixedOne,
        recording: Recording::Streaming,
        eval_every: Some(config.eval_every),
    };
    let mut taus = vec![None; d];
    let rng = SeededRng::new(seed, "classify");
    let traj = run_observed(dataset, &mut vl, &vec![0.0; d], config.horizon, &rng, &options, |t, w| {
        for (i, tau) in taus.iter_mut().enumerate() {
            if tau.is_none() && dataset.scales[i] * w[i] > 1.0 {
                *tau = Some(t);
            }
        }
    })?;
    let mut values: Vec<f64> = traj.values.iter().map(|&(_, f)| f).collect();
    if config.horizon % config.eval_every != 0 {
        values.push(dataset.loss(&traj.final_iterate));
    }
    Ok(SeedRun { seed, values, taus })
}

/// Evaluation steps: `0, k, 2k, …` plus `T` when `k ∤ T`.
pub fn evaluation_steps(horizon: usize, every: usize) -> Vec<usize> {
    let mut steps: Vec<usize> = (0..=horizon).step_by(every).collect();
    if horizon % every != 0 {
        steps.push(horizon);
    }
    steps
}

/// Runs every arm on every seed. Seed `s` fixes the dataset and the
/// sampled example sequence, shared by all arms (common random numbers).
pub fn run_classification_experiment(config: &ExperimentConfig) -> Result<ClassificationResult> {
    config.validate()?;
    let seeds: Vec<u64> = (0..config.seeds as u64).map(|k| config.base_seed + k).collect();
    let datasets = seeds
        .iter()
        .map(|&s| Dataset::build(config.setting, config.d, config.lambda, s))
        .collect::<Result<Vec<_>>>()?;
    let arms = config.arms()?;
    let results: Vec<Vec<Result<SeedRun>>> = std::thread::scope(|scope| {
        let handles: Vec<Vec<_>> = arms
            .iter()
            .map(|(_, learner)| {
                seeds
                    .iter()
                    .zip(&datasets)
                    .map(|(&seed, data)| scope.spawn(move || run_cell(data, config, learner, seed)))
                    .collect()
            })
            .collect();
        handles
            .into_iter()
            .map(|row| row.into_iter().map(|h| h.join().expect("classification worker panicked")).collect())
            .collect()
    });
    let mut out = Vec::with_capacity(arms.len());
    for ((label, _), row) in arms.iter().zip(results) {
        out.push(ArmResult { label: label.clone(), runs: row.into_iter().collect::<Result<Vec<_>>>()? });
    }
    let f_star = datasets.iter().map(optimum_value).sum::<f64>() / datasets.len() as f64;
    Ok(ClassificationResult {
        config: config.clone(),
        f_star,
        steps: evaluation_steps(config.horizon, config.eval_every),
        arms: out,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hinge_examples() {
        assert_eq!(hinge_value(0.0, 0.25), 1.0);
        assert_eq!(hinge_value(1.0, 0.25), 0.25);
        assert_eq!(hinge_value(4.0, 0.25), 1.0);
        assert_eq!(hinge_subgrad(0.5, 0.25), -0.75);
        assert_eq!(hinge_subgrad(2.0, 0.25), 0.25);
        assert_eq!(hinge_subgrad(1.0, 0.25), 0.25);
        assert_eq!(hinge_subgrad(0.0, 0.25), -0.75);
        assert_eq!(hinge_subgrad(-1.0, 0.25), -1.25);
    }

    #[test]
    fn optimum_examples() {
        assert_eq!(optimum_value(&Dataset::build(Setting::Unit, 100, 0.25, 0).unwrap()), 0.25);
        assert_eq!(optimum_value(&Dataset::build(Setting::Unit, 10, 0.5, 0).unwrap()), 0.5);
        let one = Dataset::new(vec![2.0], 0.25).unwrap();
        assert_eq!(one.loss(&[0.5]), 0.25);
        assert_eq!(optimum_value(&one), 0.25);
        let degenerate = Dataset::new(vec![0.0, 1.0], 0.25).unwrap().optimum_value();
        assert_eq!(degenerate.zero_scales, 1);
        assert_eq!(degenerate.value, 0.625);
    }

    #[test]
    fn gradient_at_origin_is_one_hot() {
        let data = Dataset::build(Setting::Unit, 10, 0.25, 0).unwrap();
        let mut rng = SeededRng::new(0, "t");
        let g = stochastic_grad_classification(&[0.0; 10], &data, &mut rng);
        assert_eq!(g.iter().filter(|&&x| x != 0.0).count(), 1);
        assert_eq!(g.iter().sum::<f64>(), -0.75);
    }

    #[test]
    fn rejects_bad_lambda() {
        assert!(Dataset::new(vec![1.0], 1.0).is_err());
        let cfg = ExperimentConfig { lambda: 0.0, ..ExperimentConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn zero_rates_freeze_the_loss() {
        let cfg = ExperimentConfig {
            eta: 0.0,
            alpha: 0.0,
            horizon: 500,
            seeds: 2,
            ..ExperimentConfig::default()
        };
        let res = run_classification_experiment(&cfg).unwrap();
        for arm in &res.arms {
            assert!(arm.mean().iter().all(|&f| f == 1.0), "{}", arm.label);
        }
    }

    #[test]
    fn evaluation_grid() {
        assert_eq!(evaluation_steps(10, 5), vec![0, 5, 10]);
        assert_eq!(evaluation_steps(7, 5), vec![0, 5, 7]);
    }
}
