use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use olu::bench::Setting;
use olu_cli::commands::*;
use olu_cli::config::{load_or_default, resolve_out_dir, set};
use olu_cli::jobs::*;
use olu_cli::{CliError, CliResult};

/// Online learning of updates: verifications and experiments.
#[derive(Parser)]
#[command(name = "olu", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// TOML or JSON config (a run manifest also works); flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: $OLU_OUT_DIR, else ./olu-out].
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Recurrence-based OLU plays against the direct Adam formula.
    VerifyEquivalence {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        d: Option<usize>,
        #[arg(short = 'T', long = "horizon")]
        horizon: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        beta1: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        beta2: Option<Vec<f64>>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, conflicts_with = "gamma")]
        alpha: Option<f64>,
        /// Raw Adam step size, converted to the scaled rate per beta pair.
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Discounted-to-dynamic regret conversion and the subinterval identity.
    ConversionCheck {
        #[command(flatten)]
        common: Common,
        #[arg(short = 'T', long = "horizon")]
        horizon: Option<usize>,
        #[arg(long)]
        trials: Option<usize>,
        /// Fixed discount; random per trial when omitted.
        #[arg(long)]
        beta: Option<f64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Baselines and the regret scaling sweep on the lower-bound instance.
    LowerBound {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',')]
        t_grid: Option<Vec<usize>>,
        #[arg(long, value_delimiter = ',')]
        c_grid: Option<Vec<f64>>,
        #[arg(long, value_delimiter = ',')]
        baseline_horizons: Option<Vec<usize>>,
    },
    /// Sparse hinge-loss classification traces.
    Classify {
        #[command(flatten)]
        common: Common,
        /// unit, scaled or both.
        #[arg(long)]
        setting: Option<String>,
        #[arg(short = 'T', long = "horizon")]
        horizon: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        betas: Option<Vec<f64>>,
        #[arg(long, conflicts_with = "gamma")]
        alpha: Option<f64>,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        eta: Option<f64>,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        seeds: Option<usize>,
        #[arg(long)]
        base_seed: Option<u64>,
        #[arg(long)]
        eval_every: Option<usize>,
        /// Skip the ordering/proximity check.
        #[arg(long)]
        no_check: bool,
    },
    /// Every acceptance criterion, with a markdown report.
    ReproduceAll {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        quick: bool,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn parse_setting(s: &str) -> CliResult<Option<Setting>> {
    if s == "both" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|e: olu::OluError| CliError::config(e.to_string()))
}

fn run(cli: Cli) -> CliResult<CommandOutput> {
    match cli.command {
        Command::VerifyEquivalence { common, d, horizon, beta1, beta2, trials, seed, alpha, gamma, tol } => {
            let mut cfg: EquivalenceConfig = load_or_default(common.config.as_deref())?;
            set(&mut cfg.d, d);
            set(&mut cfg.horizon, horizon);
            set(&mut cfg.beta1, beta1);
            set(&mut cfg.beta2, beta2);
            set(&mut cfg.trials, trials);
            set(&mut cfg.seed, seed);
            set(&mut cfg.tol, tol);
            if alpha.is_some() {
                cfg.alpha = alpha;
                cfg.gamma = None;
            }
            if gamma.is_some() {
                cfg.gamma = gamma;
                cfg.alpha = None;
            }
            cmd_verify_equivalence(&cfg, &resolve_out_dir(common.out_dir, None))
        }
        Command::ConversionCheck { common, horizon, trials, beta, seed, tol } => {
            let mut cfg: ConversionConfig = load_or_default(common.config.as_deref())?;
            set(&mut cfg.horizon, horizon);
            set(&mut cfg.trials, trials);
            set(&mut cfg.seed, seed);
            set(&mut cfg.tol, tol);
            if beta.is_some() {
                cfg.beta = beta;
            }
            cmd_conversion_check(&cfg, &resolve_out_dir(common.out_dir, None))
        }
        Command::LowerBound { common, t_grid, c_grid, baseline_horizons } => {
            let mut cfg: LowerBoundConfig = load_or_default(common.config.as_deref())?;
            set(&mut cfg.t_grid, t_grid);
            set(&mut cfg.c_grid, c_grid);
            set(&mut cfg.baseline_horizons, baseline_horizons);
            cmd_lower_bound(&cfg, &resolve_out_dir(common.out_dir, None))
        }
        Command::Classify {
            common,
            setting,
            horizon,
            betas,
            alpha,
            gamma,
            eta,
            lambda,
            d,
            seeds,
            base_seed,
            eval_every,
            no_check,
        } => {
            let mut cfg: ClassifyConfig = load_or_default(common.config.as_deref())?;
            if let Some(s) = setting {
                cfg.setting = parse_setting(&s)?;
            }
            if horizon.is_some() {
                cfg.horizon = horizon;
            }
            set(&mut cfg.betas, betas);
            set(&mut cfg.alpha, alpha);
            if gamma.is_some() {
                cfg.gamma = gamma;
            }
            set(&mut cfg.eta, eta);
            set(&mut cfg.lambda, lambda);
            set(&mut cfg.d, d);
            set(&mut cfg.seeds, seeds);
            set(&mut cfg.base_seed, base_seed);
            set(&mut cfg.eval_every, eval_every);
            cmd_classify(&cfg, !no_check, &resolve_out_dir(common.out_dir, None))
        }
        Command::ReproduceAll { common, quick, seed } => {
            let mut cfg: ReproduceConfig = load_or_default(common.config.as_deref())?;
            cfg.quick |= quick;
            set(&mut cfg.seed, seed);
            Ok(cmd_reproduce_all(&cfg, &resolve_out_dir(common.out_dir, None))?.output)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.text);
            if let Some(e) = &out.failure {
                eprintln!("olu: {e}");
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("olu: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
