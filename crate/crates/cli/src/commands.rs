//! Subcommands: run a job, write its artifacts and manifest, and render a
//! plain-text report. Printing is left to the caller.

use std::fmt::Write as _;
use std::path::Path;

use olu::bench::{ClassificationResult, Setting, DEFAULT_BETA};
use olu::io::{ledger_rows, sweep_rows, trace_rows, SCHEMA_LEDGER, SCHEMA_SWEEP, SCHEMA_TRACE};
use olu::plot::{sweep_svg, traces_svg};
use serde::{Deserialize, Serialize};

use crate::criteria::{self, Outcome};
use crate::error::{CliError, CliResult};
use crate::jobs::*;
use crate::manifest::{ArtifactWriter, RunManifest};

pub const SCHEMA_BASELINES: &str = "olu.baselines v1";
pub const SCHEMA_SEPARATION: &str = "olu.separation v1";
pub const SCHEMA_SENSITIVITY: &str = "olu.sensitivity v1";

/// What a command produced. `failure` is set when a check failed after the
/// artifacts were written; the caller maps it to the exit status.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub text: String,
    pub manifest: RunManifest,
    pub failure: Option<CliError>,
}

impl CommandOutput {
    pub fn exit_code(&self) -> i32 {
        self.failure.as_ref().map_or(0, CliError::exit_code)
    }
}

fn failure_if(failed: bool, msg: impl FnOnce() -> String) -> Option<CliError> {
    failed.then(|| CliError::Criterion(msg()))
}

// verify-equivalence ---------------------------------------------------------------

fn equivalence_text(out: &EquivalenceOutcome) -> String {
    let mut s = format!("Adam recurrence vs direct formula: {} streams, d={}, T={}\n", out.trials, out.d, out.horizon);
    let _ = writeln!(s, "{:>8} {:>8} {:>12} {:>14}  status", "beta1", "beta2", "alpha", "max deviation");
    for p in &out.pairs {
        let _ = writeln!(
            s,
            "{:>8} {:>8} {:>12.6e} {:>14.3e}  {}",
            p.beta1,
            p.beta2,
            p.alpha,
            p.max_deviation,
            p.violation.as_deref().unwrap_or("ok")
        );
    }
    let _ = writeln!(s, "max deviation {:e} in {:.3} s", out.max_deviation, out.elapsed_secs);
    s
}

pub fn cmd_verify_equivalence(cfg: &EquivalenceConfig, out_dir: &Path) -> CliResult<CommandOutput> {
    let out = run_equivalence(cfg)?;
    let mut w = ArtifactWriter::new(out_dir)?;
    w.json("equivalence.json", &out)?;
    let manifest = w.finish("verify-equivalence", cfg, vec![cfg.seed], cfg.conversion_notes())?;
    let failure = failure_if(!out.passed(), || {
        out.pairs.iter().find_map(|p| p.violation.clone()).unwrap_or_default()
    });
    Ok(CommandOutput { text: equivalence_text(&out), manifest, failure })
}

// conversion-check ------------------------------------------------------------------

fn conversion_text(out: &ConversionOutcome, tol: f64) -> String {
    let mut s = format!("Conversion identity: {} trials at T={}\n", out.trials, out.horizon);
    let _ = writeln!(s, "  dynamic regret = conversion rhs: max error {:e}, {} failures", out.max_conversion_error, out.conversion_failures);
    let _ = writeln!(s, "  subinterval identity:           max error {:e}, {} failures", out.max_subinterval_error, out.subinterval_failures);
    let _ = writeln!(s, "  tolerance {tol:e} on |a-b|/max(|a|,|b|,1)");
    for f in &out.failures {
        let _ = writeln!(s, "  {f}");
    }
    s
}

pub fn cmd_conversion_check(cfg: &ConversionConfig, out_dir: &Path) -> CliResult<CommandOutput> {
    let out = run_conversion(cfg)?;
    let mut w = ArtifactWriter::new(out_dir)?;
    w.json("conversion.json", &out)?;
    if let Some(ledger) = &out.example {
        w.csv("ledger_example.csv", SCHEMA_LEDGER, &ledger_rows(ledger))?;
    }
    let manifest = w.finish("conversion-check", cfg, vec![cfg.seed], Vec::new())?;
    let failure = failure_if(!out.passed(), || {
        format!("{} conversion and {} subinterval violations", out.conversion_failures, out.subinterval_failures)
    });
    Ok(CommandOutput { text: conversion_text(&out, cfg.tol), manifest, failure })
}

// lower-bound -----------------------------------------------------------------------

fn lower_bound_text(out: &LowerBoundOutcome) -> String {
    let mut s = String::from("Lower-bound instance\n");
    let _ = writeln!(s, "{:<18} {:>7} {:>14} {:>14}  {:<22} holds", "learner", "T", "total loss", "regret", "requirement");
    for b in &out.baselines {
        let _ = writeln!(
            s,
            "{:<18} {:>7} {:>14.4} {:>14.4}  {:<22} {}",
            b.learner, b.horizon, b.total_loss, b.regret, b.requirement, b.holds
        );
    }
    let _ = writeln!(s, "log-log slopes of regret on T:");
    for (name, slope) in &out.table.slopes {
        let _ = writeln!(s, "  {name:<18} {}", slope.map_or_else(|| "n/a (fewer than two horizons)".into(), |x| format!("{x:.4}")));
    }
    let _ = writeln!(s, "sweep took {:.3} s", out.sweep_secs);
    s
}

fn write_lower_bound(w: &mut ArtifactWriter, prefix: &str, out: &LowerBoundOutcome) -> CliResult<()> {
    w.csv(&format!("{prefix}sweep.csv"), SCHEMA_SWEEP, &sweep_rows(&out.table))?;
    w.csv(&format!("{prefix}baselines.csv"), SCHEMA_BASELINES, &out.baselines)?;
    w.json(&format!("{prefix}structure.json"), &out.structure)?;
    w.text(&format!("{prefix}lower_bound.svg"), &sweep_svg(&out.table, "dynamic regret, lower-bound instance"))?;
    Ok(())
}

pub fn cmd_lower_bound(cfg: &LowerBoundConfig, out_dir: &Path) -> CliResult<CommandOutput> {
    let out = run_lower_bound(cfg)?;
    let mut w = ArtifactWriter::new(out_dir)?;
    write_lower_bound(&mut w, "", &out)?;
    let manifest = w.finish("lower-bound", cfg, Vec::new(), Vec::new())?;
    let violations = out.violations();
    let failure = failure_if(!violations.is_empty(), || violations.join("; "));
    Ok(CommandOutput { text: lower_bound_text(&out), manifest, failure })
}

// classify --------------------------------------------------------------------------

fn classify_text(out: &ClassifyOutcome) -> String {
    let mut s = String::new();
    for (res, check) in out.results.iter().zip(&out.checks) {
        let summary = res.summary();
        let _ = writeln!(
            s,
            "setting {} (T={}, d={}, {} seeds): final F, mean [min, max]",
            res.config.setting.name(),
            res.config.horizon,
            res.config.d,
            res.config.seeds
        );
        for a in &summary.arms {
            let tau = a.tau.median.map_or_else(|| "-".into(), |m| format!("{m}"));
            let _ = writeln!(
                s,
                "  {:<20} {:.6} [{:.6}, {:.6}]  coords crossed {}/{}  median tau {tau}",
                a.label, a.final_mean, a.final_min, a.final_max, a.tau.crossed, a.tau.d
            );
        }
        let _ = writeln!(s, "  {:<20} {:.6}", "F*", summary.f_star);
        if let Some(c) = check {
            let _ = writeln!(s, "  ordering {} / within proximity {}", c.ordered, c.near_optimum);
        }
    }
    let _ = writeln!(s, "took {:.2} s", out.elapsed_secs);
    s
}

fn write_classify(w: &mut ArtifactWriter, prefix: &str, out: &ClassifyOutcome) -> CliResult<()> {
    for res in &out.results {
        let name = res.config.setting.name();
        w.csv(&format!("{prefix}trace_{name}.csv"), SCHEMA_TRACE, &trace_rows(res))?;
        w.json(&format!("{prefix}summary_{name}.json"), &res.summary())?;
    }
    let panels: Vec<(&str, &ClassificationResult)> =
        out.results.iter().map(|r| (setting_title(r.config.setting), r)).collect();
    w.text(&format!("{prefix}classify.svg"), &traces_svg(&panels))?;
    Ok(())
}

fn setting_title(s: Setting) -> &'static str {
    match s {
        Setting::Unit => "unit scales",
        Setting::Scaled => "scales ~ U[0, 2]",
    }
}

pub fn cmd_classify(cfg: &ClassifyConfig, check: bool, out_dir: &Path) -> CliResult<CommandOutput> {
    let out = run_classify(cfg)?;
    let mut w = ArtifactWriter::new(out_dir)?;
    write_classify(&mut w, "", &out)?;
    let seeds = (0..cfg.seeds as u64).map(|k| cfg.base_seed + k).collect();
    let manifest = w.finish("classify", cfg, seeds, cfg.conversion_notes())?;
    let failure = failure_if(check && !out.passed(), || {
        let bad: Vec<String> = out
            .results
            .iter()
            .zip(&out.checks)
            .filter(|(_, c)| !c.as_ref().is_some_and(OrderingCheck::holds))
            .map(|(r, _)| r.config.setting.name().to_string())
            .collect();
        format!("ordering/proximity check failed in setting(s) {}", bad.join(", "))
    });
    Ok(CommandOutput { text: classify_text(&out), manifest, failure })
}

// reproduce-all ---------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ReproduceConfig {
    pub quick: bool,
    pub seed: u64,
}

impl Default for ReproduceConfig {
    fn default() -> Self {
        Self { quick: false, seed: 0 }
    }
}

/// Parameters of every job in one reproduce run.
#[derive(Debug, Clone)]
pub struct Plan {
    pub equivalence: criteria::EquivalenceParams,
    pub literal: LiteralConfig,
    pub conversion: ConversionConfig,
    pub bounds: BoundsConfig,
    pub lower_bound: LowerBoundConfig,
    pub lower_bound_horizons: Vec<usize>,
    pub slopes: criteria::SlopeWindows,
    pub separation: criteria::SeparationParams,
    pub telescoping: TelescopingConfig,
    pub classification: criteria::ClassificationParams,
    pub sensitivity: ClassifyConfig,
}

pub const SENSITIVITY_BETAS: [f64; 5] = [0.9, 0.99, DEFAULT_BETA, 0.999, 1.0];

impl ReproduceConfig {
    /// Acceptance settings, or with trial and seed counts cut about 4× in
    /// quick mode. Horizons stay put: the sweeps are already cheap and the
    /// classification thresholds are calibrated to them.
    pub fn plan(&self) -> Plan {
        let q = |full: usize, quick: usize| if self.quick { quick } else { full };
        let seed = self.seed;
        let mut equivalence = criteria::EquivalenceParams::default();
        equivalence.config.trials = q(100, 25);
        equivalence.config.seed = seed;
        let lower_bound = LowerBoundConfig::default();
        let classify = ClassifyConfig { seeds: q(5, 2), base_seed: seed, ..ClassifyConfig::default() };
        Plan {
            equivalence,
            literal: LiteralConfig { streams: q(10, 3), seed, ..Default::default() },
            conversion: ConversionConfig { trials: q(500, 125), seed, ..Default::default() },
            bounds: BoundsConfig { trials: q(1000, 250), seed, ..Default::default() },
            lower_bound_horizons: lower_bound.baseline_horizons.clone(),
            lower_bound,
            slopes: criteria::SlopeWindows::default(),
            separation: criteria::SeparationParams::default(),
            telescoping: TelescopingConfig { trials: q(20, 5), seed, ..Default::default() },
            sensitivity: ClassifyConfig { betas: SENSITIVITY_BETAS.to_vec(), seeds: q(5, 1), ..classify.clone() },
            classification: criteria::ClassificationParams { config: classify, budget_secs: 180.0 },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityRow {
    pub setting: Setting,
    pub learner: String,
    pub final_mean: f64,
    pub final_min: f64,
    pub final_max: f64,
    pub f_star: f64,
}

fn sensitivity_rows(out: &ClassifyOutcome) -> Vec<SensitivityRow> {
    out.results
        .iter()
        .flat_map(|r| {
            let s = r.summary();
            s.arms
                .into_iter()
                .map(move |a| SensitivityRow {
                    setting: s.setting,
                    learner: a.label,
                    final_mean: a.final_mean,
                    final_min: a.final_min,
                    final_max: a.final_max,
                    f_star: s.f_star,
                })
                .collect::<Vec<_>>()
        })
        .collect()
}

/// The deterministic CSV jobs of a reproduce run.
struct CsvJobs {
    conversion: ConversionOutcome,
    lower_bound: LowerBoundOutcome,
    separation: Vec<SeparationRow>,
    classify: ClassifyOutcome,
    sensitivity: ClassifyOutcome,
}

fn csv_files(jobs: &CsvJobs) -> CliResult<Vec<(String, Vec<u8>)>> {
    use olu::io::csv_bytes;
    let mut files = Vec::new();
    if let Some(l) = &jobs.conversion.example {
        files.push(("conversion/ledger_example.csv".into(), csv_bytes(SCHEMA_LEDGER, &ledger_rows(l))?));
    }
    files.push(("lower_bound/sweep.csv".into(), csv_bytes(SCHEMA_SWEEP, &sweep_rows(&jobs.lower_bound.table))?));
    files.push(("lower_bound/baselines.csv".into(), csv_bytes(SCHEMA_BASELINES, &jobs.lower_bound.baselines)?));
    files.push(("lower_bound/separation.csv".into(), csv_bytes(SCHEMA_SEPARATION, &jobs.separation)?));
    for res in &jobs.classify.results {
        files.push((format!("classify/trace_{}.csv", res.config.setting.name()), csv_bytes(SCHEMA_TRACE, &trace_rows(res))?));
    }
    files.push(("classify/sensitivity.csv".into(), csv_bytes(SCHEMA_SENSITIVITY, &sensitivity_rows(&jobs.sensitivity))?));
    Ok(files)
}

fn rerun_csv_jobs(plan: &Plan) -> CliResult<CsvJobs> {
    let sep = &plan.separation;
    Ok(CsvJobs {
        conversion: run_conversion(&plan.conversion)?,
        lower_bound: run_lower_bound(&plan.lower_bound)?,
        separation: total_loss_separation(sep.horizon, &sep.c_grid, &sep.sgd_alphas)?,
        classify: run_classify(&plan.classification.config)?,
        sensitivity: run_classify(&plan.sensitivity)?,
    })
}

pub struct ReproduceOutput {
    pub outcomes: Vec<Outcome>,
    pub output: CommandOutput,
}

/// Runs every criterion, writes all artifacts plus `report.md`, and checks
/// determinism by regenerating the CSV jobs in-process and comparing bytes.
pub fn cmd_reproduce_all(cfg: &ReproduceConfig, out_dir: &Path) -> CliResult<ReproduceOutput> {
    let plan = cfg.plan();
    let mut w = ArtifactWriter::new(out_dir)?;
    let mut outcomes = Vec::new();

    let (o, eq) = criteria::equivalence(&plan.equivalence)?;
    w.json("equivalence.json", &eq)?;
    outcomes.push(o);
    let (o, lit) = criteria::literal_oracle(&plan.literal)?;
    w.json("literal.json", &lit)?;
    outcomes.push(o);
    let (o, conversion) = criteria::conversion(&plan.conversion)?;
    w.json("conversion/conversion.json", &conversion)?;
    outcomes.push(o);
    let (o, bounds) = criteria::bounds(&plan.bounds)?;
    w.json("bounds.json", &bounds)?;
    outcomes.push(o);

    let lower_bound = run_lower_bound(&plan.lower_bound)?;
    write_lower_bound(&mut w, "lower_bound/", &lower_bound)?;
    outcomes.push(criteria::lower_bounds(&lower_bound, &plan.lower_bound_horizons));
    outcomes.push(criteria::scaling(&lower_bound, &plan.slopes));
    let (o, separation) = criteria::separation(&plan.separation)?;
    outcomes.push(o);

    let (o, tele) = criteria::telescoping(&plan.telescoping)?;
    w.json("telescoping.json", &tele)?;
    outcomes.push(o);

    let (o, classify) = criteria::classification(&plan.classification)?;
    write_classify(&mut w, "classify/", &classify)?;
    outcomes.push(o);
    let sensitivity = run_classify(&plan.sensitivity)?;

    let first = CsvJobs { conversion, lower_bound, separation, classify, sensitivity };
    let files = csv_files(&first)?;
    for (rel, bytes) in &files {
        w.bytes(rel, bytes)?;
    }

    let started = std::time::Instant::now();
    let again = csv_files(&rerun_csv_jobs(&plan)?)?;
    let differing: Vec<&str> = files
        .iter()
        .zip(&again)
        .filter(|(a, b)| a != b)
        .map(|(a, _)| a.0.as_str())
        .chain(files.get(again.len()..).unwrap_or_default().iter().map(|f| f.0.as_str()))
        .collect();
    let passed = differing.is_empty() && files.len() == again.len();
    outcomes.push(Outcome {
        id: 10,
        name: criteria::NAMES[9].into(),
        passed,
        detail: if passed {
            format!("{} CSV files regenerated in-process, byte-identical", files.len())
        } else {
            format!("regenerated CSVs differ: {}", differing.join(", "))
        },
        elapsed_secs: started.elapsed().as_secs_f64(),
    });

    let report = render_report(cfg, &outcomes, &first);
    w.text("report.md", &report)?;
    w.json("criteria.json", &outcomes)?;
    let manifest = w.finish("reproduce-all", cfg, vec![cfg.seed], Vec::new())?;

    let mut text: String = outcomes.iter().map(|o| o.line() + "\n").collect();
    let failed: Vec<String> = outcomes.iter().filter(|o| !o.passed).map(|o| o.id.to_string()).collect();
    let _ = writeln!(text, "report: {}", out_dir.join("report.md").display());
    let failure = failure_if(!failed.is_empty(), || format!("criteria {} failed", failed.join(", ")));
    Ok(ReproduceOutput { outcomes, output: CommandOutput { text, manifest, failure } })
}

fn render_report(cfg: &ReproduceConfig, outcomes: &[Outcome], jobs: &CsvJobs) -> String {
    let mut s = String::from("# OLU reproduction report\n\n");
    let _ = writeln!(s, "Mode: {}. Seed: {}.\n", if cfg.quick { "quick" } else { "full" }, cfg.seed);
    let _ = writeln!(s, "| # | criterion | result | detail |\n|---|---|---|---|");
    for o in outcomes {
        let _ = writeln!(s, "| {} | {} | {} | {} |", o.id, o.name, o.status(), o.detail.replace('|', "/"));
    }
    let passed = outcomes.iter().filter(|o| o.passed).count();
    let _ = writeln!(s, "\n{passed} of {} criteria passed.\n", outcomes.len());

    let _ = writeln!(s, "## Lower-bound sweep\n\n| learner | slope |\n|---|---|");
    for (name, slope) in &jobs.lower_bound.table.slopes {
        let _ = writeln!(s, "| {name} | {} |", slope.map_or_else(|| "n/a".into(), |x| format!("{x:.4}")));
    }
    let _ = writeln!(s, "\n| learner | T | regret | total loss | c |\n|---|---|---|---|---|");
    for r in &jobs.lower_bound.table.rows {
        let c = r.c.map_or_else(String::new, |c| c.to_string());
        let _ = writeln!(s, "| {} | {} | {:.2} | {:.2} | {c} |", r.learner, r.horizon, r.regret, r.total_loss);
    }
    let _ = writeln!(s, "\nTotal losses at T={}:\n\n| learner | total loss | c |\n|---|---|---|", 1 << 14);
    for r in &jobs.separation {
        let c = r.c.map_or_else(String::new, |c| c.to_string());
        let _ = writeln!(s, "| {} | {:.2} | {c} |", r.learner, r.total_loss);
    }

    let _ = writeln!(s, "\n## Classification\n");
    for res in &jobs.classify.results {
        let sm = res.summary();
        let _ = writeln!(
            s,
            "Setting `{}`, T={}, {} seeds, F* = {:.4}\n\n| learner | final F mean | min | max | coords crossed | median tau |\n|---|---|---|---|---|---|",
            sm.setting.name(),
            sm.horizon,
            res.config.seeds,
            sm.f_star
        );
        for a in &sm.arms {
            let tau = a.tau.median.map_or_else(|| "-".into(), |m| m.to_string());
            let _ = writeln!(
                s,
                "| {} | {:.4} | {:.4} | {:.4} | {}/{} | {tau} |",
                a.label, a.final_mean, a.final_min, a.final_max, a.tau.crossed, a.tau.d
            );
        }
        let _ = writeln!(s);
    }

    let _ = writeln!(s, "## Beta sensitivity\n\nFinal mean F per discount ({} seeds).\n", jobs.sensitivity.results.first().map_or(0, |r| r.config.seeds));
    let rows = sensitivity_rows(&jobs.sensitivity);
    let _ = writeln!(s, "| learner | unit | scaled |\n|---|---|---|");
    let mut labels: Vec<&str> = Vec::new();
    for r in &rows {
        if !labels.contains(&r.learner.as_str()) {
            labels.push(&r.learner);
        }
    }
    for label in labels {
        let cell = |setting: Setting| {
            rows.iter()
                .find(|r| r.learner == label && r.setting == setting)
                .map_or_else(|| "-".into(), |r| format!("{:.4}", r.final_mean))
        };
        let _ = writeln!(s, "| {label} | {} | {} |", cell(Setting::Unit), cell(Setting::Scaled));
    }
    s
}
