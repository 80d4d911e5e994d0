//! `tsmc`: simulate datasets, fit single methods, run the simulation studies
//! and report their tables.

mod error;
mod experiment;
mod fit;
mod output;
mod report;
mod simulate;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use error::{CliError, Result};
use tsmc_core::config::RunConfig;

#[derive(Debug, Parser)]
#[command(
    name = "tsmc",
    version,
    about = "Transfer SMC for power-prior Bayesian transfer learning"
)]
struct Cli {
    #[command(flatten)]
    common: Common,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Root random seed (overrides the config file).
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file (simulate) or directory (other commands).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads; defaults to the available parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// TOML run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Increase log verbosity (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a target or source dataset.
    Simulate(simulate::SimulateArgs),
    /// Fit one method to dataset files.
    Fit(fit::FitArgs),
    /// Run a simulation study over replicates and shift levels.
    Experiment(experiment::ExperimentArgs),
    /// Tabulate a records file and write density grids for plotting.
    Report(report::ReportArgs),
}

impl Common {
    /// File configuration with the common flags applied on top.
    pub fn run_config(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(p) => {
                if !p.exists() {
                    return Err(CliError::Input {
                        path: p.clone(),
                        message: "config file not found".into(),
                    });
                }
                RunConfig::load(p)?
            }
            None => RunConfig::default(),
        };
        if let Some(s) = self.seed {
            cfg.run.seed = Some(s);
        }
        if let Some(w) = self.workers {
            cfg.run.workers = Some(w);
        }
        if let Some(o) = &self.out {
            cfg.run.out = Some(o.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let cfg = cli.common.run_config()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers())
        .build_global();
    if let Err(e) = pool {
        log::debug!("global thread pool already set: {e}");
    }
    match cli.command {
        Command::Simulate(a) => simulate::run(a, cfg),
        Command::Fit(a) => fit::run(a, cfg),
        Command::Experiment(a) => experiment::run(a, cfg),
        Command::Report(a) => report::run(a, cfg),
    }
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.common.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level))
        .format_timestamp(None)
        .init();
    if let Err(e) = run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
