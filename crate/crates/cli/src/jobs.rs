//! The computations behind each command. No files are touched here; the
//! commands decide what to emit.

use std::time::Instant;

use olu::adversarial::{
    assert_comparator_argmin, assert_no_momentum_orthogonality, default_families, default_t_grid, make_lower_bound,
    measure, scaling_sweep, SweepTable, DEFAULT_C_GRID,
};
use olu::bench::{
    run_classification_experiment, ClassificationResult, ExperimentConfig, Setting, DEFAULT_ADAM_ALPHA, DEFAULT_BETA,
};
use olu::driver::{verify_adam_equivalence, verify_telescoping_identity, Quadratic};
use olu::learners::{alpha_from_gamma, literal_scaled_ftrl, play_stream};
use olu::moments::m_ratio;
use olu::regret::{
    bound_discounted, bound_dynamic_clipped, bound_dynamic_unbounded, bound_static_scale_free, conversion_rhs,
    subinterval_identity, BoundReport,
};
use olu::{AlphaSchedule, Extended, LearnerConfig, LearnerKind, OluError, Partition, RegretLedger, SeededRng, Tolerance};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

/// Failure messages kept per job; the counts are always complete.
const MAX_LISTED_FAILURES: usize = 10;

fn trial_rng(base: &SeededRng, job: &str, k: usize) -> SeededRng {
    base.fork(&format!("{job}/{k}"))
}

fn log_uniform(rng: &mut SeededRng, lo_exp: f64, hi_exp: f64) -> f64 {
    10f64.powf(rng.uniform_in(lo_exp, hi_exp))
}

fn check_beta(name: &str, b: f64) -> CliResult<()> {
    if b > 0.0 && b <= 1.0 {
        Ok(())
    } else {
        Err(CliError::config(format!("{name} must lie in (0, 1], got {b}")))
    }
}

/// `|a − b| / max(|a|, |b|, 1)`: relative for large values, absolute near zero.
pub fn floored_relative_error(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

fn push_failure(list: &mut Vec<String>, msg: String) {
    if list.len() < MAX_LISTED_FAILURES {
        list.push(msg);
    }
}

// Adam equivalence -----------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EquivalenceConfig {
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    /// Every pair of `beta1 × beta2` is checked.
    pub beta1: Vec<f64>,
    pub beta2: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Scaled rate; 1 when neither this nor `gamma` is set.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    /// Raw Adam rate, converted per pair.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub tol: f64,
}

impl Default for EquivalenceConfig {
    fn default() -> Self {
        Self {
            d: 8,
            horizon: 200,
            beta1: vec![0.9, 0.99],
            beta2: vec![0.9, 0.99],
            trials: 100,
            seed: 0,
            alpha: None,
            gamma: None,
            tol: 1e-12,
        }
    }
}

impl EquivalenceConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.trials == 0 {
            return Err(CliError::config("trials must be positive"));
        }
        if self.d == 0 || self.horizon == 0 {
            return Err(CliError::config("d and T must be positive"));
        }
        if self.beta1.is_empty() || self.beta2.is_empty() {
            return Err(CliError::config("beta lists must be nonempty"));
        }
        for &b in &self.beta1 {
            check_beta("beta1", b)?;
        }
        for &b in &self.beta2 {
            check_beta("beta2", b)?;
        }
        if !(self.tol > 0.0) {
            return Err(CliError::config("tol must be positive"));
        }
        match (self.alpha, self.gamma) {
            (Some(_), Some(_)) => return Err(CliError::config("give alpha or gamma, not both")),
            (Some(a), None) if !(a > 0.0 && a.is_finite()) => return Err(CliError::config("alpha must be positive")),
            _ => {}
        }
        for &b1 in &self.beta1 {
            for &b2 in &self.beta2 {
                self.alpha_for(b1, b2)?;
            }
        }
        Ok(())
    }

    pub fn alpha_for(&self, beta1: f64, beta2: f64) -> CliResult<f64> {
        match self.gamma {
            Some(g) => Ok(alpha_from_gamma(g, beta1, beta2)?),
            None => Ok(self.alpha.unwrap_or(1.0)),
        }
    }

    /// One human-readable line per γ→α conversion.
    pub fn conversion_notes(&self) -> Vec<String> {
        let Some(g) = self.gamma else { return Vec::new() };
        let mut notes = Vec::new();
        for &b1 in &self.beta1 {
            for &b2 in &self.beta2 {
                if let Ok(a) = self.alpha_for(b1, b2) {
                    notes.push(format!("gamma={g} beta1={b1} beta2={b2} -> alpha={a:e}"));
                }
            }
        }
        notes
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairDeviation {
    pub beta1: f64,
    pub beta2: f64,
    pub alpha: f64,
    pub max_deviation: f64,
    pub violation: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceOutcome {
    pub trials: usize,
    pub d: usize,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub pairs: Vec<PairDeviation>,
    pub max_deviation: f64,
    pub elapsed_secs: f64,
}

impl EquivalenceOutcome {
    pub fn passed(&self) -> bool {
        self.pairs.iter().all(|p| p.violation.is_none())
    }
}

fn gradient_stream(rng: &mut SeededRng, d: usize, horizon: usize) -> Vec<Vec<f64>> {
    let scale = log_uniform(rng, -3.0, 3.0);
    (0..horizon)
        .map(|_| {
            (0..d)
                .map(|_| if rng.bernoulli(0.05) { 0.0 } else { scale * rng.uniform_in(-1.0, 1.0) })
                .collect()
        })
        .collect()
}

/// Recurrence learner against the direct Adam formula on random streams.
/// Entries are occasionally zero so that the `0/0 = 0` convention is hit.
pub fn run_equivalence(cfg: &EquivalenceConfig) -> CliResult<EquivalenceOutcome> {
    cfg.validate()?;
    let started = Instant::now();
    let base = SeededRng::new(cfg.seed, "equivalence");
    let streams: Vec<Vec<Vec<f64>>> =
        (0..cfg.trials).map(|k| gradient_stream(&mut trial_rng(&base, "stream", k), cfg.d, cfg.horizon)).collect();
    let mut pairs = Vec::new();
    for &b1 in &cfg.beta1 {
        for &b2 in &cfg.beta2 {
            let alpha = cfg.alpha_for(b1, b2)?;
            let schedule = AlphaSchedule::Constant(alpha);
            let mut row = PairDeviation { beta1: b1, beta2: b2, alpha, max_deviation: 0.0, violation: None };
            for (k, stream) in streams.iter().enumerate() {
                match verify_adam_equivalence(stream, &schedule, b1, b2, cfg.tol) {
                    Ok(rep) => row.max_deviation = row.max_deviation.max(rep.max_deviation),
                    Err(OluError::CheckFailed(m)) => {
                        row.violation = Some(format!("stream {k}: {m}"));
                        break;
                    }
                    Err(e) => return Err(e.into()),
                }
            }
            pairs.push(row);
        }
    }
    let max_deviation = pairs.iter().map(|p| p.max_deviation).fold(0.0, f64::max);
    Ok(EquivalenceOutcome {
        trials: cfg.trials,
        d: cfg.d,
        horizon: cfg.horizon,
        pairs,
        max_deviation,
        elapsed_secs: started.elapsed().as_secs_f64(),
    })
}

// Literal scaled-loss FTRL ------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LiteralConfig {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub betas: Vec<f64>,
    pub streams: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for LiteralConfig {
    fn default() -> Self {
        Self { horizon: 500, betas: vec![0.5, 0.9, 0.99], streams: 10, seed: 0, tol: 1e-8 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralRow {
    pub beta: f64,
    pub max_relative_error: f64,
    pub worst_step: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiteralOutcome {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub streams: usize,
    pub tol: f64,
    pub rows: Vec<LiteralRow>,
}

impl LiteralOutcome {
    pub fn max_error(&self) -> f64 {
        self.rows.iter().map(|r| r.max_relative_error).fold(0.0, f64::max)
    }

    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.max_relative_error <= self.tol)
    }
}

/// The double-precision recurrence against FTRL evaluated literally on the
/// up-scaled losses in double-double arithmetic (`β1 = β2 = β`).
pub fn run_literal(cfg: &LiteralConfig) -> CliResult<LiteralOutcome> {
    if cfg.horizon == 0 || cfg.streams == 0 || cfg.betas.is_empty() {
        return Err(CliError::config("T, streams and betas must be nonempty"));
    }
    let base = SeededRng::new(cfg.seed, "literal");
    let mut rows = Vec::new();
    for (j, &beta) in cfg.betas.iter().enumerate() {
        check_beta("beta", beta)?;
        let mut row = LiteralRow { beta, max_relative_error: 0.0, worst_step: 0 };
        for k in 0..cfg.streams {
            let mut rng = trial_rng(&base, &format!("beta{j}"), k);
            let scale = log_uniform(&mut rng, -2.0, 2.0);
            let g: Vec<f64> = (0..cfg.horizon).map(|_| scale * rng.uniform_in(-1.0, 1.0)).collect();
            let plays = play_stream(&LearnerConfig::discounted(1.0, beta, beta), &g)?;
            let gx: Vec<Extended> = g.iter().map(|&x| Extended::from(x)).collect();
            let b = Extended::from(beta);
            let oracle = literal_scaled_ftrl(&gx, &AlphaSchedule::Constant(Extended::from(1.0)), b, b)?;
            for (t, o) in oracle.iter().enumerate() {
                let err = Tolerance::relative_deviation(plays[t + 1], f64::from(*o));
                if err > row.max_relative_error {
                    row.max_relative_error = err;
                    row.worst_step = t + 1;
                }
            }
        }
        rows.push(row);
    }
    Ok(LiteralOutcome { horizon: cfg.horizon, streams: cfg.streams, tol: cfg.tol, rows })
}

// Conversion identity -------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ConversionConfig {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub trials: usize,
    /// Fixed discount; drawn per trial when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    pub seed: u64,
    pub tol: f64,
    pub p_cut: f64,
    pub rep_bound: f64,
}

impl Default for ConversionConfig {
    fn default() -> Self {
        Self { horizon: 100, trials: 500, beta: None, seed: 0, tol: 1e-9, p_cut: 0.125, rep_bound: 2.0 }
    }
}

impl ConversionConfig {
    pub fn validate(&self) -> CliResult<()> {
        if self.trials == 0 || self.horizon == 0 {
            return Err(CliError::config("T and trials must be positive"));
        }
        if let Some(b) = self.beta {
            check_beta("beta", b)?;
        }
        if !(0.0..=1.0).contains(&self.p_cut) || !(self.rep_bound >= 0.0) || !(self.tol > 0.0) {
            return Err(CliError::config("p_cut must lie in [0, 1]; rep_bound and tol must be nonnegative"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConversionOutcome {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub trials: usize,
    pub max_conversion_error: f64,
    pub max_subinterval_error: f64,
    pub conversion_failures: usize,
    pub subinterval_failures: usize,
    pub failures: Vec<String>,
    /// One ledger from the campaign, for inspection.
    #[serde(skip)]
    pub example: Option<RegretLedger<f64>>,
}

impl ConversionOutcome {
    pub fn passed(&self) -> bool {
        self.conversion_failures == 0 && self.subinterval_failures == 0
    }
}

fn random_comparators(rng: &mut SeededRng, n: usize, bound: f64) -> Vec<f64> {
    if rng.bernoulli(0.5) {
        (0..n).map(|_| rng.uniform_in(-bound, bound)).collect()
    } else {
        // Piecewise constant with occasional jumps.
        let mut u = rng.uniform_in(-bound, bound);
        (0..n)
            .map(|_| {
                if rng.bernoulli(0.05) {
                    u = rng.uniform_in(-bound, bound);
                }
                u
            })
            .collect()
    }
}

fn random_ledger(rng: &mut SeededRng, horizon: usize, kind: usize) -> CliResult<RegretLedger<f64>> {
    let scale = log_uniform(rng, -1.0, 1.0);
    let v: Vec<f64> = (0..horizon).map(|_| scale * rng.uniform_in(-1.0, 1.0)).collect();
    let u = random_comparators(rng, horizon, 2.0);
    let learner = match kind % 6 {
        0 => {
            let plays = (0..horizon).map(|_| rng.uniform_in(-3.0, 3.0)).collect();
            return Ok(RegretLedger::new(v, plays, u)?);
        }
        1 => LearnerConfig::scale_free(1.0),
        2 => LearnerConfig::discounted(1.0, 0.9, 0.95),
        3 => LearnerConfig::adagrad(0.5),
        4 => LearnerConfig::clipped(1.0, 0.9, 1.0),
        _ => LearnerConfig::sgd(0.1),
    };
    Ok(RegretLedger::from_learner(&learner, v, u)?)
}

/// Random ledgers (random plays or plays of every FTRL-type learner) with
/// random partitions and representatives.
pub fn run_conversion(cfg: &ConversionConfig) -> CliResult<ConversionOutcome> {
    cfg.validate()?;
    let base = SeededRng::new(cfg.seed, "conversion");
    let mut out = ConversionOutcome {
        horizon: cfg.horizon,
        trials: cfg.trials,
        max_conversion_error: 0.0,
        max_subinterval_error: 0.0,
        conversion_failures: 0,
        subinterval_failures: 0,
        failures: Vec::new(),
        example: None,
    };
    for k in 0..cfg.trials {
        let mut rng = trial_rng(&base, "trial", k);
        let ledger = random_ledger(&mut rng, cfg.horizon, k)?;
        let beta = cfg.beta.unwrap_or_else(|| if rng.bernoulli(0.2) { 1.0 } else { rng.uniform_in(0.3, 1.0) });
        let partition = Partition::<f64>::random(cfg.horizon, cfg.p_cut, cfg.rep_bound, &mut rng)?;
        let rhs = conversion_rhs(&ledger, &partition, beta)?;
        let err = floored_relative_error(rhs, ledger.dynamic_regret());
        out.max_conversion_error = out.max_conversion_error.max(err);
        if !(err <= cfg.tol) {
            out.conversion_failures += 1;
            push_failure(&mut out.failures, format!("conversion trial {k}: beta={beta} error {err:e}"));
        }

        let x = 1 + rng.index(cfg.horizon);
        let y = 1 + rng.index(cfg.horizon);
        let u = rng.uniform_in(-cfg.rep_bound, cfg.rep_bound);
        let (lhs, rhs) = subinterval_identity(&ledger, x.min(y), x.max(y), u, beta)?;
        let err = floored_relative_error(lhs, rhs);
        out.max_subinterval_error = out.max_subinterval_error.max(err);
        if !(err <= cfg.tol) {
            out.subinterval_failures += 1;
            push_failure(&mut out.failures, format!("subinterval trial {k}: [{x}, {y}] beta={beta} error {err:e}"));
        }
        if k == 1 {
            out.example = Some(ledger);
        }
    }
    Ok(out)
}

// Regret bounds -------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub trials: usize,
    pub seed: u64,
    /// Horizon of the static and discounted campaigns.
    pub static_horizon: usize,
    /// Horizon of the two dynamic campaigns.
    pub dynamic_horizon: usize,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self { trials: 1000, seed: 0, static_horizon: 256, dynamic_horizon: 512 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundStats {
    pub bound: String,
    pub trials: usize,
    /// Violated bound evaluations; the discounted campaign checks every prefix.
    pub violations: usize,
    /// Smallest `(bound − regret) / |bound|` seen.
    pub min_relative_slack: f64,
    /// The trial attaining it.
    pub tightest: Option<BoundReport>,
    pub failures: Vec<String>,
}

impl BoundStats {
    fn new(bound: &str) -> Self {
        Self {
            bound: bound.into(),
            trials: 0,
            violations: 0,
            min_relative_slack: f64::INFINITY,
            tightest: None,
            failures: Vec::new(),
        }
    }

    /// A bound counts as holding when `regret ≤ bound·(1 + 1e-12) + 1e-12`,
    /// which absorbs rounding in the two independently summed quantities.
    fn record(&mut self, trial: usize, report: BoundReport) {
        let holds = report.regret <= report.value * (1.0 + 1e-12) + 1e-12;
        if !holds {
            self.violations += 1;
            push_failure(
                &mut self.failures,
                format!("trial {trial}: regret {} > bound {}", report.regret, report.value),
            );
        }
        // A zero bound with zero regret (all losses zero so far) says nothing
        // about tightness.
        if report.value == 0.0 && holds {
            return;
        }
        let rel = report.slack / report.value.abs();
        if rel < self.min_relative_slack {
            self.min_relative_slack = rel;
            self.tightest = Some(report);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundsOutcome {
    pub stats: Vec<BoundStats>,
}

impl BoundsOutcome {
    pub fn passed(&self) -> bool {
        self.stats.iter().all(|s| s.violations == 0 && s.trials > 0)
    }
}

/// Loss streams of mixed character: iid, sign-biased, sparse and the
/// adversarial lower-bound coordinate.
fn bound_stream(rng: &mut SeededRng, horizon: usize, kind: usize) -> CliResult<Vec<f64>> {
    let scale = log_uniform(rng, -2.0, 2.0);
    let v: Vec<f64> = match kind % 4 {
        0 => (0..horizon).map(|_| rng.uniform_in(-1.0, 1.0)).collect(),
        1 => (0..horizon)
            .map(|_| {
                let m = rng.uniform_in(0.2, 1.0);
                if rng.bernoulli(0.05) {
                    -m
                } else {
                    m
                }
            })
            .collect(),
        2 => (0..horizon).map(|_| if rng.bernoulli(0.1) { rng.uniform_in(-1.0, 1.0) } else { 0.0 }).collect(),
        _ => make_lower_bound::<f64>(horizon.max(4))?.losses.coordinate(rng.index(2))[..horizon].to_vec(),
    };
    Ok(v.into_iter().map(|x| x * scale).collect())
}

fn pick<T: Copy>(rng: &mut SeededRng, xs: &[T]) -> T {
    xs[rng.index(xs.len())]
}

/// Randomized campaigns for the static, discounted, unbounded-dynamic and
/// clipped-dynamic regret bounds.
pub fn run_bounds(cfg: &BoundsConfig) -> CliResult<BoundsOutcome> {
    if cfg.trials == 0 || cfg.static_horizon == 0 || cfg.dynamic_horizon == 0 {
        return Err(CliError::config("trials and horizons must be positive"));
    }
    let base = SeededRng::new(cfg.seed, "bounds");
    let mut stat = BoundStats::new("static_scale_free");
    let mut disc = BoundStats::new("discounted");
    let mut unb = BoundStats::new("dynamic_unbounded");
    let mut clp = BoundStats::new("dynamic_clipped");

    for k in 0..cfg.trials {
        let n = cfg.static_horizon;
        let mut rng = trial_rng(&base, "static", k);
        let v = bound_stream(&mut rng, n, k)?;
        let alpha = pick(&mut rng, &[0.1, 1.0, 10.0]);
        let u = pick(&mut rng, &[0.0, 1.0, -1.0]);
        let l = RegretLedger::from_learner(&LearnerConfig::scale_free(alpha), v, vec![u; n])?;
        stat.trials += 1;
        stat.record(k, BoundReport::new("static_scale_free", bound_static_scale_free(&l, alpha, u)?, l.static_regret(u)));

        let mut rng = trial_rng(&base, "discounted", k);
        let v = bound_stream(&mut rng, n, k)?;
        let alpha = pick(&mut rng, &[0.1, 1.0, 10.0]);
        let beta = pick(&mut rng, &[0.5, 0.9, 0.99]);
        let u = rng.uniform_in(-alpha, alpha);
        let l = RegretLedger::from_learner(&LearnerConfig::discounted(alpha, beta, beta), v, vec![u; n])?;
        disc.trials += 1;
        // Anytime: every prefix must satisfy its own bound.
        for t in 1..=n {
            let rep = BoundReport::new("discounted", bound_discounted(&l, alpha, u, beta, t)?, l.discounted_regret(u, beta, t)?);
            disc.record(k, rep);
        }

        let n = cfg.dynamic_horizon;
        let mut rng = trial_rng(&base, "unbounded", k);
        let v = bound_stream(&mut rng, n, k)?;
        let alpha = pick(&mut rng, &[0.5, 1.0]);
        let beta = pick(&mut rng, &[0.9, 0.99]);
        let m = m_ratio(&v, beta, n)?;
        let u = random_comparators(&mut rng, n, alpha * m);
        let l = RegretLedger::from_learner(&LearnerConfig::discounted(alpha, beta, beta), v, u)?;
        unb.trials += 1;
        unb.record(k, BoundReport::new("dynamic_unbounded", bound_dynamic_unbounded(&l, alpha, beta, m)?, l.dynamic_regret()));

        let mut rng = trial_rng(&base, "clipped", k);
        let v = bound_stream(&mut rng, n, k)?;
        let beta = pick(&mut rng, &[0.9, 0.99]);
        let u = random_comparators(&mut rng, n, 1.0);
        let l = RegretLedger::from_learner(&LearnerConfig::clipped(1.0, beta, 1.0), v, u)?;
        clp.trials += 1;
        clp.record(k, BoundReport::new("dynamic_clipped", bound_dynamic_clipped(&l, 1.0, beta)?, l.dynamic_regret()));
    }
    Ok(BoundsOutcome { stats: vec![stat, disc, unb, clp] })
}

// Lower bound ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LowerBoundConfig {
    pub t_grid: Vec<usize>,
    pub c_grid: Vec<f64>,
    /// Horizons of the baseline inequality checks.
    pub baseline_horizons: Vec<usize>,
    /// Constant SGD rates making up the no-momentum family, next to
    /// `1/sqrt(t)` SGD and AdaGrad.
    pub sgd_alphas: Vec<f64>,
    /// Tuned clipped FTRL must satisfy `regret ≤ tuned_fraction · T` ...
    pub tuned_fraction: f64,
    /// ... for every swept `T` at least this large.
    pub tuned_from: usize,
}

impl Default for LowerBoundConfig {
    fn default() -> Self {
        Self {
            t_grid: default_t_grid(),
            c_grid: DEFAULT_C_GRID.to_vec(),
            baseline_horizons: vec![16, 64, 256, 1024, 4096],
            sgd_alphas: vec![0.01, 0.1, 1.0, 10.0],
            tuned_fraction: 0.5,
            tuned_from: 1 << 12,
        }
    }
}

pub const NO_MOMENTUM_FIXED: &str = "adagrad";
pub const UNDISCOUNTED_CLIPPED: &str = "clipped_beta1";
pub const TUNED_CLIPPED: &str = "tuned_clipped";

/// The no-momentum members measured by the lower-bound checks.
pub fn no_momentum_family(sgd_alphas: &[f64]) -> Vec<(String, LearnerConfig<f64>)> {
    let mut out: Vec<(String, LearnerConfig<f64>)> =
        sgd_alphas.iter().map(|&a| (format!("sgd(alpha={a})"), LearnerConfig::sgd(a))).collect();
    out.push(("sgd_invsqrt".into(), LearnerConfig::sgd(1.0).with_schedule(AlphaSchedule::InvSqrt(1.0))));
    out.push((NO_MOMENTUM_FIXED.into(), LearnerConfig::adagrad(1.0)));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineCheck {
    pub learner: String,
    #[serde(rename = "T")]
    pub horizon: usize,
    pub total_loss: f64,
    pub regret: f64,
    /// The inequality the row must satisfy.
    pub requirement: String,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureCheck {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub t_hat: usize,
    pub orthogonal: bool,
    pub argmin: bool,
    pub path_length_ok: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LowerBoundOutcome {
    pub baselines: Vec<BaselineCheck>,
    pub structure: Vec<StructureCheck>,
    pub table: SweepTable,
    pub sweep_secs: f64,
}

impl LowerBoundOutcome {
    pub fn violations(&self) -> Vec<String> {
        let mut out: Vec<String> = self
            .baselines
            .iter()
            .filter(|b| !b.holds)
            .map(|b| format!("{} at T={}: regret {} violates {}", b.learner, b.horizon, b.regret, b.requirement))
            .collect();
        out.extend(
            self.structure
                .iter()
                .filter(|s| !(s.orthogonal && s.argmin && s.path_length_ok))
                .map(|s| format!("instance structure at T={}: {s:?}", s.horizon)),
        );
        out
    }
}

fn baseline_check(learner: &str, horizon: usize, total_loss: f64, regret: f64, tuned: (f64, usize)) -> Option<BaselineCheck> {
    let t = horizon as f64;
    let (requirement, holds) = if learner == UNDISCOUNTED_CLIPPED {
        ("regret >= (T-3)/2".to_string(), regret >= (t - 3.0) / 2.0)
    } else if learner == TUNED_CLIPPED {
        if horizon < tuned.1 {
            return None;
        }
        (format!("regret <= {}*T", tuned.0), regret <= tuned.0 * t)
    } else {
        ("regret >= T-3".to_string(), regret >= t - 3.0)
    };
    Some(BaselineCheck { learner: learner.into(), horizon, total_loss, regret, requirement, holds })
}

/// Baselines and structural checks on each baseline horizon, then the
/// scaling sweep; every sweep cell is checked against its inequality too.
pub fn run_lower_bound(cfg: &LowerBoundConfig) -> CliResult<LowerBoundOutcome> {
    if cfg.t_grid.is_empty() || cfg.c_grid.is_empty() {
        return Err(CliError::config("t_grid and c_grid must be nonempty"));
    }
    if cfg.t_grid.iter().chain(&cfg.baseline_horizons).any(|&t| t < 4) {
        return Err(CliError::config("every horizon must be at least 4"));
    }
    if cfg.c_grid.iter().any(|&c| !(c > 0.0)) {
        return Err(CliError::config("c grid entries must be positive"));
    }
    let tuned = (cfg.tuned_fraction, cfg.tuned_from);
    let mut learners = no_momentum_family(&cfg.sgd_alphas);
    learners.push((UNDISCOUNTED_CLIPPED.into(), LearnerConfig::clipped(1.0, 1.0, 1.0)));

    let mut baselines = Vec::new();
    let mut structure = Vec::new();
    let mut horizons: Vec<usize> = cfg.baseline_horizons.iter().chain(&cfg.t_grid).copied().collect();
    horizons.sort_unstable();
    horizons.dedup();
    for &t in &horizons {
        let inst = make_lower_bound::<f64>(t)?;
        let [p0, p1] = inst.path_lengths();
        structure.push(StructureCheck {
            horizon: t,
            t_hat: inst.t_hat,
            orthogonal: assert_no_momentum_orthogonality(&inst),
            argmin: assert_comparator_argmin(&inst),
            path_length_ok: p0 <= 2.0 && p1 <= 2.0,
        });
        if cfg.baseline_horizons.contains(&t) {
            for (name, learner) in &learners {
                let row = measure(&inst, name, learner)?;
                baselines.extend(baseline_check(name, t, row.total_loss, row.dynamic_regret, tuned));
            }
        }
    }

    let started = Instant::now();
    let table = scaling_sweep(&cfg.t_grid, &default_families(&cfg.c_grid))?;
    let sweep_secs = started.elapsed().as_secs_f64();
    for r in &table.rows {
        baselines.extend(baseline_check(&r.learner, r.horizon, r.total_loss, r.regret, tuned));
    }
    Ok(LowerBoundOutcome { baselines, structure, table, sweep_secs })
}

/// Total losses of each family on one instance; tuned FTRL reports the best `c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationRow {
    pub learner: String,
    pub total_loss: f64,
    pub c: Option<f64>,
}

pub fn total_loss_separation(horizon: usize, c_grid: &[f64], sgd_alphas: &[f64]) -> CliResult<Vec<SeparationRow>> {
    let inst = make_lower_bound::<f64>(horizon)?;
    let mut rows = Vec::new();
    for (name, learner) in no_momentum_family(sgd_alphas) {
        rows.push(SeparationRow { learner: name.clone(), total_loss: measure(&inst, &name, &learner)?.total_loss, c: None });
    }
    let clipped = LearnerConfig::clipped(1.0, 1.0, 1.0);
    rows.push(SeparationRow {
        learner: UNDISCOUNTED_CLIPPED.into(),
        total_loss: measure(&inst, UNDISCOUNTED_CLIPPED, &clipped)?.total_loss,
        c: None,
    });
    let mut best: Option<SeparationRow> = None;
    for &c in c_grid {
        let cfg = LearnerConfig::clipped(1.0, olu::adversarial::tuned_beta(c, horizon), 1.0);
        let loss = measure(&inst, TUNED_CLIPPED, &cfg)?.total_loss;
        if best.as_ref().map_or(true, |b| loss < b.total_loss) {
            best = Some(SeparationRow { learner: TUNED_CLIPPED.into(), total_loss: loss, c: Some(c) });
        }
    }
    rows.extend(best);
    Ok(rows)
}

// Telescoping identity -----------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TelescopingConfig {
    /// Trials per learner kind.
    pub trials: usize,
    pub max_d: usize,
    #[serde(rename = "max_T")]
    pub max_horizon: usize,
    pub seed: u64,
    pub tol: f64,
}

impl Default for TelescopingConfig {
    fn default() -> Self {
        Self { trials: 20, max_d: 5, max_horizon: 200, seed: 0, tol: 1e-9 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopingRow {
    pub kind: String,
    pub trials: usize,
    pub max_relative_error: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopingOutcome {
    pub tol: f64,
    pub rows: Vec<TelescopingRow>,
}

impl TelescopingOutcome {
    pub fn passed(&self) -> bool {
        self.rows.iter().all(|r| r.failures == 0 && r.trials > 0)
    }
}

/// One representative configuration per learner kind.
pub fn representative(kind: LearnerKind) -> LearnerConfig<f64> {
    match kind {
        LearnerKind::Ogd => LearnerConfig::ogd(0.1, None),
        LearnerKind::NoMomentumSgd => LearnerConfig::sgd(0.1),
        LearnerKind::NoMomentumAdagrad => LearnerConfig::adagrad(0.5),
        LearnerKind::ScaleFreeFtrl => LearnerConfig::scale_free(0.5),
        LearnerKind::DiscountedFtrl => LearnerConfig::discounted(0.5, 0.9, 0.99),
        LearnerKind::DiscountedFtrlClipped => LearnerConfig::clipped(0.5, 0.9, 0.3),
    }
}

/// Random PSD quadratics with exact averaged gradients, for every learner kind.
pub fn run_telescoping(cfg: &TelescopingConfig) -> CliResult<TelescopingOutcome> {
    if cfg.trials == 0 || cfg.max_d == 0 || cfg.max_horizon == 0 {
        return Err(CliError::config("trials, max_d and max_T must be positive"));
    }
    let base = SeededRng::new(cfg.seed, "telescoping");
    let mut rows = Vec::new();
    for kind in LearnerKind::ALL {
        let learner = representative(kind);
        let mut row = TelescopingRow { kind: kind.name().into(), trials: 0, max_relative_error: 0.0, failures: 0 };
        for k in 0..cfg.trials {
            let mut rng = trial_rng(&base, kind.name(), k);
            let d = 1 + rng.index(cfg.max_d);
            let horizon = 1 + rng.index(cfg.max_horizon);
            let f = Quadratic::random_psd(d, &mut rng);
            let rep = verify_telescoping_identity(&f, &learner, horizon, &mut rng)?;
            row.trials += 1;
            row.max_relative_error = row.max_relative_error.max(rep.relative_error);
            if !(rep.relative_error <= cfg.tol) {
                row.failures += 1;
            }
        }
        rows.push(row);
    }
    Ok(TelescopingOutcome { tol: cfg.tol, rows })
}

// Classification ------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Both settings when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub setting: Option<Setting>,
    /// Per-setting default when absent.
    #[serde(rename = "T", skip_serializing_if = "Option::is_none")]
    pub horizon: Option<usize>,
    pub d: usize,
    pub lambda: f64,
    pub eta: f64,
    pub alpha: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gamma: Option<f64>,
    pub betas: Vec<f64>,
    pub seeds: usize,
    pub base_seed: u64,
    pub eval_every: usize,
    /// Largest accepted gap between the best `β < 1` arm and the optimum.
    pub proximity: f64,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        let e = ExperimentConfig::default();
        Self {
            setting: None,
            horizon: None,
            d: e.d,
            lambda: e.lambda,
            eta: e.eta,
            alpha: DEFAULT_ADAM_ALPHA,
            gamma: None,
            betas: vec![DEFAULT_BETA, 1.0],
            seeds: e.seeds,
            base_seed: e.base_seed,
            eval_every: e.eval_every,
            proximity: 0.05,
        }
    }
}

impl ClassifyConfig {
    pub fn settings(&self) -> Vec<Setting> {
        match self.setting {
            Some(s) => vec![s],
            None => vec![Setting::Unit, Setting::Scaled],
        }
    }

    pub fn experiments(&self) -> CliResult<Vec<ExperimentConfig>> {
        self.settings()
            .into_iter()
            .map(|s| {
                let base = ExperimentConfig::for_setting(s);
                let e = ExperimentConfig {
                    setting: s,
                    d: self.d,
                    lambda: self.lambda,
                    eta: self.eta,
                    alpha: self.alpha,
                    betas: self.betas.clone(),
                    gamma: self.gamma,
                    seeds: self.seeds,
                    base_seed: self.base_seed,
                    horizon: self.horizon.unwrap_or(base.horizon),
                    eval_every: self.eval_every,
                };
                e.validate()?;
                Ok(e)
            })
            .collect()
    }

    pub fn conversion_notes(&self) -> Vec<String> {
        let Some(g) = self.gamma else { return Vec::new() };
        self.betas
            .iter()
            .filter_map(|&b| alpha_from_gamma(g, b, b).ok().map(|a| format!("gamma={g} beta={b} -> alpha={a:e}")))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrderingCheck {
    pub setting: Setting,
    pub discounted: String,
    pub discounted_final: f64,
    pub sgd_final: f64,
    pub undiscounted_final: Option<f64>,
    pub f_star: f64,
    pub ordered: bool,
    pub near_optimum: bool,
}

impl OrderingCheck {
    pub fn holds(&self) -> bool {
        self.ordered && self.near_optimum
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClassifyOutcome {
    pub results: Vec<ClassificationResult>,
    /// Absent for a setting whose arms lack SGD or a `β < 1` arm.
    pub checks: Vec<Option<OrderingCheck>>,
    pub elapsed_secs: f64,
}

impl ClassifyOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.as_ref().is_some_and(OrderingCheck::holds))
    }
}

fn ordering_check(result: &ClassificationResult, proximity: f64) -> Option<OrderingCheck> {
    let summary = result.summary();
    let best = summary.best_discounted()?;
    let sgd = summary.get("sgd")?.final_mean;
    let undiscounted = summary.get(&olu::bench::adam_label(1.0)).map(|a| a.final_mean);
    let ordered = best.final_mean < sgd && undiscounted.map_or(true, |u| best.final_mean < u);
    Some(OrderingCheck {
        setting: summary.setting,
        discounted: best.label.clone(),
        discounted_final: best.final_mean,
        sgd_final: sgd,
        undiscounted_final: undiscounted,
        f_star: summary.f_star,
        ordered,
        near_optimum: (best.final_mean - summary.f_star).abs() <= proximity,
    })
}

pub fn run_classify(cfg: &ClassifyConfig) -> CliResult<ClassifyOutcome> {
    let experiments = cfg.experiments()?;
    let started = Instant::now();
    let results = experiments.iter().map(run_classification_experiment).collect::<olu::Result<Vec<_>>>()?;
    let elapsed_secs = started.elapsed().as_secs_f64();
    let checks = results.iter().map(|r| ordering_check(r, cfg.proximity)).collect();
    Ok(ClassifyOutcome { results, checks, elapsed_secs })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_trials_is_a_config_error() {
        let cfg = EquivalenceConfig { trials: 0, ..Default::default() };
        assert!(matches!(run_equivalence(&cfg), Err(CliError::Config(_))));
    }

    #[test]
    fn gamma_needs_beta2_below_one() {
        let cfg = EquivalenceConfig { gamma: Some(0.01), beta2: vec![1.0], ..Default::default() };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let cfg = EquivalenceConfig { gamma: Some(0.01), trials: 2, ..Default::default() };
        let out = run_equivalence(&cfg).unwrap();
        assert!(out.passed());
        assert_eq!(cfg.conversion_notes().len(), 4);
    }

    #[test]
    fn tiny_conversion_campaigns() {
        for beta in [Some(1.0), Some(0.5), None] {
            let cfg = ConversionConfig { horizon: 1, trials: 20, beta, ..Default::default() };
            assert!(run_conversion(&cfg).unwrap().passed());
        }
    }

    #[test]
    fn floored_error_is_absolute_near_zero() {
        assert_eq!(floored_relative_error(1e-3, 0.0), 1e-3);
        assert_eq!(floored_relative_error(200.0, 100.0), 0.5);
    }

    #[test]
    fn single_point_grid_has_no_slope_but_is_checked() {
        let cfg = LowerBoundConfig { t_grid: vec![4096], baseline_horizons: vec![16], ..Default::default() };
        let out = run_lower_bound(&cfg).unwrap();
        assert!(out.table.slopes.iter().all(|(_, s)| s.is_none()));
        assert!(out.baselines.iter().any(|b| b.learner == TUNED_CLIPPED && b.holds));
        assert!(out.violations().is_empty());
    }

    #[test]
    fn zero_rates_give_flat_traces() {
        let cfg = ClassifyConfig {
            setting: Some(Setting::Unit),
            horizon: Some(200),
            d: 10,
            eta: 0.0,
            alpha: 0.0,
            seeds: 2,
            eval_every: 50,
            ..Default::default()
        };
        let out = run_classify(&cfg).unwrap();
        for arm in &out.results[0].arms {
            assert!(arm.mean().iter().all(|&f| f == 1.0));
        }
        assert!(!out.passed());
    }
}
