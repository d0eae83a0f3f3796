//! Command-line front end: `filter`, `estimate`, `montecarlo` and `jtest`
//! subcommands driven by a TOML configuration file.

pub mod config;
pub mod csvio;
pub mod error;
pub mod estimate;
pub mod filter;
pub mod jtest;
pub mod montecarlo;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use config::{Mode, RunConfig};
use error::CliError;

/// Environment override of the output directory.
pub const ENV_OUT: &str = "FCSMM_OUT";
/// Environment override of the worker count.
pub const ENV_WORKERS: &str = "FCSMM_WORKERS";

#[derive(Debug, Parser)]
#[command(name = "fcsmm", version, about = "Factor copula estimation by simulated method of moments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the marginal models and write standardized residuals.
    Filter(CommonArgs),
    /// Estimate the copula parameters and run inference.
    Estimate(CommonArgs),
    /// Run a Monte Carlo design.
    Montecarlo(CommonArgs),
    /// Recompute the overidentification test from estimation artifacts.
    Jtest(CommonArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct CommonArgs {
    #[arg(long)]
    pub config: PathBuf,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub workers: Option<usize>,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Resolved run settings shared by the subcommands.
#[derive(Debug, Clone)]
pub struct Ctx {
    pub out: PathBuf,
    pub seed: u64,
    pub seed_override: Option<u64>,
}

impl Ctx {
    /// Flag, then environment, then config file.
    pub fn resolve(args: &CommonArgs, cfg: &RunConfig) -> Result<Self, CliError> {
        let out = args
            .out
            .clone()
            .or_else(|| std::env::var_os(ENV_OUT).map(PathBuf::from))
            .or_else(|| cfg.output_dir.clone())
            .unwrap_or_else(|| PathBuf::from("out"));
        std::fs::create_dir_all(&out)
            .map_err(|e| CliError::Config(format!("cannot create output directory {}: {e}", out.display())))?;
        Ok(Self {
            out,
            seed: args.seed.unwrap_or(cfg.seed),
            seed_override: args.seed,
        })
    }
}

fn workers(args: &CommonArgs) -> Result<Option<usize>, CliError> {
    if let Some(w) = args.workers {
        return Ok(Some(w));
    }
    match std::env::var(ENV_WORKERS) {
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| CliError::Config(format!("{ENV_WORKERS} must be a positive integer, got `{v}`"))),
        Err(_) => Ok(None),
    }
}

/// Runs one subcommand on a pool of the requested size.
pub fn run(cli: &Cli) -> Result<(), CliError> {
    let (mode, args) = match &cli.command {
        Command::Filter(a) => (Mode::Filter, a),
        Command::Estimate(a) => (Mode::Estimate, a),
        Command::Montecarlo(a) => (Mode::Montecarlo, a),
        Command::Jtest(a) => (Mode::Jtest, a),
    };
    let cfg = RunConfig::load(&args.config)?;
    cfg.check_mode(mode)?;
    let ctx = Ctx::resolve(args, &cfg)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers(args)? {
        if w == 0 {
            return Err(CliError::Config("--workers must be at least 1".into()));
        }
        pool = pool.num_threads(w);
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    pool.install(|| match mode {
        Mode::Filter => filter::cmd_filter(&cfg, &ctx),
        Mode::Estimate => estimate::cmd_estimate(&cfg, &ctx),
        Mode::Montecarlo => montecarlo::cmd_montecarlo(&cfg, &ctx),
        Mode::Jtest => jtest::cmd_jtest(&cfg, &ctx),
    })
}
