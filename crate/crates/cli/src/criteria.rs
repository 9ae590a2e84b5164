//! The ten acceptance criteria. Each takes explicit parameters whose
//! `Default` is the acceptance setting and returns a pass/fail [`Outcome`]
//! together with the data it was judged on.

use std::path::{Path, PathBuf};
use std::time::Instant;

use olu::adversarial::DEFAULT_C_GRID;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};
use crate::jobs::*;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
    pub elapsed_secs: f64,
}

impl Outcome {
    fn new(id: u8, passed: bool, detail: String, started: Instant) -> Self {
        Self { id, name: NAMES[id as usize - 1].into(), passed, detail, elapsed_secs: started.elapsed().as_secs_f64() }
    }

    pub fn status(&self) -> &'static str {
        if self.passed {
            "PASS"
        } else {
            "FAIL"
        }
    }

    /// `criterion  3 PASS conversion identity: ... [0.12 s]`
    pub fn line(&self) -> String {
        format!("criterion {:>2} {} {}: {} [{:.2} s]", self.id, self.status(), self.name, self.detail, self.elapsed_secs)
    }
}

pub const NAMES: [&str; 10] = [
    "adam/ftrl equivalence",
    "literal scaled-loss oracle",
    "conversion identity",
    "regret bounds",
    "lower bounds",
    "scaling exponents",
    "total-loss separation",
    "telescoping identity",
    "classification ordering",
    "determinism",
];

fn within(x: Option<f64>, lo: f64, hi: f64) -> bool {
    x.is_some_and(|s| s >= lo && s <= hi)
}

fn fmt_slope(x: Option<f64>) -> String {
    x.map_or_else(|| "n/a".into(), |s| format!("{s:.3}"))
}

// 1 ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct EquivalenceParams {
    pub config: EquivalenceConfig,
    pub budget_secs: f64,
}

impl Default for EquivalenceParams {
    fn default() -> Self {
        Self { config: EquivalenceConfig::default(), budget_secs: 5.0 }
    }
}

pub fn equivalence(p: &EquivalenceParams) -> CliResult<(Outcome, EquivalenceOutcome)> {
    let started = Instant::now();
    let out = run_equivalence(&p.config)?;
    let in_budget = out.elapsed_secs < p.budget_secs;
    let mut detail = format!(
        "max deviation {:.3e} (tol {:e}) over {} streams x {} beta pairs, {:.2} s of {} s budget",
        out.max_deviation,
        p.config.tol,
        out.trials,
        out.pairs.len(),
        out.elapsed_secs,
        p.budget_secs
    );
    if let Some(v) = out.pairs.iter().find_map(|p| p.violation.as_ref()) {
        detail.push_str(&format!("; {v}"));
    }
    Ok((Outcome::new(1, out.passed() && in_budget, detail, started), out))
}

// 2 ---------------------------------------------------------------------------

pub fn literal_oracle(cfg: &LiteralConfig) -> CliResult<(Outcome, LiteralOutcome)> {
    let started = Instant::now();
    let out = run_literal(cfg)?;
    let per_beta: Vec<String> =
        out.rows.iter().map(|r| format!("beta={}: {:.2e}", r.beta, r.max_relative_error)).collect();
    let detail = format!("t <= {}, {} streams per beta, max rel error {} (tol {:e})", cfg.horizon, cfg.streams, per_beta.join(", "), cfg.tol);
    Ok((Outcome::new(2, out.passed(), detail, started), out))
}

// 3 ---------------------------------------------------------------------------

pub fn conversion(cfg: &ConversionConfig) -> CliResult<(Outcome, ConversionOutcome)> {
    let started = Instant::now();
    let out = run_conversion(cfg)?;
    let detail = format!(
        "{} trials at T={}: conversion max err {:.2e} ({} failures), subinterval max err {:.2e} ({} failures), tol {:e}",
        out.trials,
        out.horizon,
        out.max_conversion_error,
        out.conversion_failures,
        out.max_subinterval_error,
        out.subinterval_failures,
        cfg.tol
    );
    Ok((Outcome::new(3, out.passed(), detail, started), out))
}

// 4 ---------------------------------------------------------------------------

pub fn bounds(cfg: &BoundsConfig) -> CliResult<(Outcome, BoundsOutcome)> {
    let started = Instant::now();
    let out = run_bounds(cfg)?;
    let parts: Vec<String> = out
        .stats
        .iter()
        .map(|s| format!("{} {}/{} violations (min rel slack {:.3})", s.bound, s.violations, s.trials, s.min_relative_slack))
        .collect();
    Ok((Outcome::new(4, out.passed(), parts.join("; "), started), out))
}

// 5, 6 --------------------------------------------------------------------------

/// Baseline inequalities on the criterion horizons and the instance structure.
pub fn lower_bounds(out: &LowerBoundOutcome, horizons: &[usize]) -> Outcome {
    let started = Instant::now();
    let rows: Vec<&BaselineCheck> =
        out.baselines.iter().filter(|b| horizons.contains(&b.horizon) && b.learner != TUNED_CLIPPED).collect();
    let failed: Vec<String> = rows
        .iter()
        .filter(|b| !b.holds)
        .map(|b| format!("{} T={} regret {}", b.learner, b.horizon, b.regret))
        .collect();
    let structure: Vec<&StructureCheck> = out.structure.iter().filter(|s| horizons.contains(&s.horizon)).collect();
    let structure_ok = structure.len() == horizons.len() && structure.iter().all(|s| s.orthogonal && s.argmin && s.path_length_ok);
    let covered = horizons.iter().all(|t| rows.iter().any(|b| b.horizon == *t));
    let min_ratio = |pred: &dyn Fn(&str) -> bool| {
        rows.iter().filter(|b| pred(&b.learner)).map(|b| b.regret / b.horizon as f64).fold(f64::INFINITY, f64::min)
    };
    let mut detail = format!(
        "T in {horizons:?}: {} rows, min no-momentum regret/T {:.4}, min beta=1 regret/T {:.4}, structure {}",
        rows.len(),
        min_ratio(&|n| n != UNDISCOUNTED_CLIPPED),
        min_ratio(&|n| n == UNDISCOUNTED_CLIPPED),
        if structure_ok { "ok" } else { "BROKEN" }
    );
    if !failed.is_empty() {
        detail.push_str(&format!("; violated: {}", failed.join(", ")));
    }
    Outcome::new(5, failed.is_empty() && structure_ok && covered, detail, started)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SlopeWindows {
    pub tuned: (f64, f64),
    pub no_momentum: (f64, f64),
    pub undiscounted_min: f64,
    pub budget_secs: f64,
}

impl Default for SlopeWindows {
    fn default() -> Self {
        Self { tuned: (0.55, 0.80), no_momentum: (0.95, 1.05), undiscounted_min: 0.95, budget_secs: 120.0 }
    }
}

pub fn scaling(out: &LowerBoundOutcome, w: &SlopeWindows) -> Outcome {
    let started = Instant::now();
    let tuned = out.table.slope(TUNED_CLIPPED);
    let nm = out.table.slope(NO_MOMENTUM_FIXED);
    let und = out.table.slope(UNDISCOUNTED_CLIPPED);
    let passed = within(tuned, w.tuned.0, w.tuned.1)
        && within(nm, w.no_momentum.0, w.no_momentum.1)
        && und.is_some_and(|s| s >= w.undiscounted_min)
        && out.sweep_secs < w.budget_secs;
    let detail = format!(
        "slopes tuned {} in [{}, {}], adagrad {} in [{}, {}], beta=1 {} >= {}; sweep {:.2} s of {} s budget",
        fmt_slope(tuned),
        w.tuned.0,
        w.tuned.1,
        fmt_slope(nm),
        w.no_momentum.0,
        w.no_momentum.1,
        fmt_slope(und),
        w.undiscounted_min,
        out.sweep_secs,
        w.budget_secs
    );
    Outcome::new(6, passed, detail, started)
}

// 7 ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct SeparationParams {
    pub horizon: usize,
    pub c_grid: Vec<f64>,
    pub sgd_alphas: Vec<f64>,
    /// No-momentum total loss must be at least this.
    pub no_momentum_floor: f64,
    /// Tuned total loss must be at most `−tuned_fraction · T`.
    pub tuned_fraction: f64,
}

impl Default for SeparationParams {
    fn default() -> Self {
        Self {
            horizon: 1 << 14,
            c_grid: DEFAULT_C_GRID.to_vec(),
            sgd_alphas: LowerBoundConfig::default().sgd_alphas,
            no_momentum_floor: -3.0,
            tuned_fraction: 0.8,
        }
    }
}

pub fn separation(p: &SeparationParams) -> CliResult<(Outcome, Vec<SeparationRow>)> {
    let started = Instant::now();
    let rows = total_loss_separation(p.horizon, &p.c_grid, &p.sgd_alphas)?;
    let t = p.horizon as f64;
    let mut ok = true;
    let mut parts = Vec::new();
    let nm_min = rows
        .iter()
        .filter(|r| r.learner != UNDISCOUNTED_CLIPPED && r.learner != TUNED_CLIPPED)
        .map(|r| r.total_loss)
        .fold(f64::INFINITY, f64::min);
    ok &= nm_min >= p.no_momentum_floor;
    parts.push(format!("no-momentum min total loss {nm_min} >= {}", p.no_momentum_floor));
    let und = rows.iter().find(|r| r.learner == UNDISCOUNTED_CLIPPED).map(|r| r.total_loss);
    let und_floor = -t / 2.0 - 1.5;
    ok &= und.is_some_and(|x| x >= und_floor);
    parts.push(format!("beta=1 {:.1} >= {und_floor}", und.unwrap_or(f64::NAN)));
    let tuned = rows.iter().find(|r| r.learner == TUNED_CLIPPED);
    let ceiling = -p.tuned_fraction * t;
    ok &= tuned.is_some_and(|r| r.total_loss <= ceiling);
    if let Some(r) = tuned {
        parts.push(format!("tuned (c={}) {:.1} <= {ceiling}", r.c.unwrap_or(f64::NAN), r.total_loss));
    }
    let detail = format!("T={}: {}", p.horizon, parts.join(", "));
    Ok((Outcome::new(7, ok, detail, started), rows))
}

// 8 ---------------------------------------------------------------------------

pub fn telescoping(cfg: &TelescopingConfig) -> CliResult<(Outcome, TelescopingOutcome)> {
    let started = Instant::now();
    let out = run_telescoping(cfg)?;
    let worst = out.rows.iter().map(|r| r.max_relative_error).fold(0.0, f64::max);
    let failures: usize = out.rows.iter().map(|r| r.failures).sum();
    let detail = format!(
        "{} kinds x {} quadratics (d <= {}, T <= {}): max rel error {worst:.2e} (tol {:e}), {failures} failures",
        out.rows.len(),
        cfg.trials,
        cfg.max_d,
        cfg.max_horizon,
        cfg.tol
    );
    Ok((Outcome::new(8, out.passed(), detail, started), out))
}

// 9 ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq)]
pub struct ClassificationParams {
    pub config: ClassifyConfig,
    pub budget_secs: f64,
}

impl Default for ClassificationParams {
    fn default() -> Self {
        Self { config: ClassifyConfig::default(), budget_secs: 180.0 }
    }
}

pub fn classification(p: &ClassificationParams) -> CliResult<(Outcome, ClassifyOutcome)> {
    let started = Instant::now();
    let out = run_classify(&p.config)?;
    let mut parts = Vec::new();
    for (res, check) in out.results.iter().zip(&out.checks) {
        match check {
            Some(c) => parts.push(format!(
                "{}: {} {:.4} vs sgd {:.4}, beta=1 {}, F* {:.4}{}{}",
                res.config.setting.name(),
                c.discounted,
                c.discounted_final,
                c.sgd_final,
                c.undiscounted_final.map_or_else(|| "n/a".into(), |u| format!("{u:.4}")),
                c.f_star,
                if c.ordered { "" } else { " ORDER VIOLATED" },
                if c.near_optimum { "" } else { " FAR FROM OPTIMUM" },
            )),
            None => parts.push(format!("{}: no comparable arms", res.config.setting.name())),
        }
    }
    let passed = out.passed() && out.elapsed_secs < p.budget_secs;
    let detail = format!("{}; {:.2} s of {} s budget", parts.join("; "), out.elapsed_secs, p.budget_secs);
    Ok((Outcome::new(9, passed, detail, started), out))
}

// 10 --------------------------------------------------------------------------

/// Relative paths of every `.csv` below `root`, sorted.
pub fn csv_files(root: &Path) -> CliResult<Vec<PathBuf>> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<PathBuf>) -> CliResult<()> {
        let entries = std::fs::read_dir(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
        for entry in entries {
            let path = entry?.path();
            if path.is_dir() {
                walk(root, &path, out)?;
            } else if path.extension().is_some_and(|e| e == "csv") {
                out.push(path.strip_prefix(root).expect("below root").to_path_buf());
            }
        }
        Ok(())
    }
    let mut out = Vec::new();
    walk(root, root, &mut out)?;
    out.sort();
    Ok(out)
}

/// Byte-compares the CSV files of two output directories.
pub fn determinism(first: &Path, second: &Path) -> CliResult<Outcome> {
    let started = Instant::now();
    let a = csv_files(first)?;
    let b = csv_files(second)?;
    let mut differing = Vec::new();
    for rel in &a {
        if !b.contains(rel) || std::fs::read(first.join(rel))? != std::fs::read(second.join(rel))? {
            differing.push(rel.display().to_string());
        }
    }
    differing.extend(b.iter().filter(|r| !a.contains(r)).map(|r| r.display().to_string()));
    let passed = differing.is_empty() && !a.is_empty();
    let detail = if passed {
        format!("{} CSV files byte-identical across two runs", a.len())
    } else if a.is_empty() {
        "no CSV files produced".into()
    } else {
        format!("differing: {}", differing.join(", "))
    };
    Ok(Outcome::new(10, passed, detail, started))
}
