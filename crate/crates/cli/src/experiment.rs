use clap::Args;
use tsmc_core::config::RunConfig;
use tsmc_core::eval::{write_records, ClppdMode};
use tsmc_core::experiments::{
    aggregate, param_groups, run_experiment, write_aggregate_csv, write_samples_csv,
    write_summary_toml, Example, SummaryMeta,
};
use tsmc_core::model::{LinearRegression, Model, WeibullCure};

use crate::error::{CliError, Result};
use crate::output::{header, out_dir, save_config, Clock};

#[derive(Debug, Args)]
pub struct ExperimentArgs {
    /// linear or cure (overrides the config file).
    #[arg(long)]
    example: Option<Example>,

    /// Shift levels, comma separated.
    #[arg(long, value_delimiter = ',')]
    ks: Option<Vec<u32>>,

    #[arg(long)]
    replicates: Option<usize>,

    #[arg(long)]
    particles: Option<usize>,

    #[arg(long)]
    n_target: Option<usize>,

    #[arg(long)]
    n_source: Option<usize>,

    /// Grid size P for the evidence search.
    #[arg(long)]
    grid: Option<usize>,

    /// Joint NPP draws per replicate (default: the particle count).
    #[arg(long)]
    npp_samples: Option<usize>,

    #[arg(long)]
    npp_a: Option<f64>,

    #[arg(long)]
    npp_b: Option<f64>,

    /// log-of-mean or mean-of-log.
    #[arg(long, value_parser = parse_mode)]
    clppd_mode: Option<ClppdMode>,

    /// Per-parameter shift scale, comma separated.
    #[arg(long, value_delimiter = ',')]
    s_hat: Option<Vec<f64>>,

    /// 100 replicates and 2000 particles unless set explicitly.
    #[arg(long)]
    full_scale: bool,
}

fn parse_mode(s: &str) -> std::result::Result<ClppdMode, String> {
    match s {
        "log-of-mean" => Ok(ClppdMode::LogOfMean),
        "mean-of-log" => Ok(ClppdMode::MeanOfLog),
        other => Err(format!(
            "unknown CLPPD mode `{other}` (log-of-mean or mean-of-log)"
        )),
    }
}

fn merge<T>(slot: &mut Option<T>, flag: Option<T>) {
    if flag.is_some() {
        *slot = flag;
    }
}

/// Applies the command-line values on top of the file configuration.
fn apply(a: ExperimentArgs, cfg: &mut RunConfig) {
    merge(&mut cfg.experiment.example, a.example);
    merge(&mut cfg.experiment.ks, a.ks);
    if a.full_scale {
        cfg.experiment.full_scale = Some(true);
    }
    let sc = &mut cfg.scenario;
    merge(&mut sc.replicates, a.replicates);
    merge(&mut sc.particles, a.particles);
    merge(&mut sc.n_target, a.n_target);
    merge(&mut sc.n_source, a.n_source);
    merge(&mut sc.grid, a.grid);
    merge(&mut sc.npp_samples, a.npp_samples);
    merge(&mut sc.npp_a, a.npp_a);
    merge(&mut sc.npp_b, a.npp_b);
    merge(&mut sc.clppd_mode, a.clppd_mode);
    merge(&mut sc.s_hat, a.s_hat);
}

pub fn run(a: ExperimentArgs, mut cfg: RunConfig) -> Result<()> {
    let clock = Clock::start("experiment");
    apply(a, &mut cfg);
    cfg.validate()?;
    let example = cfg.experiment.example.ok_or_else(|| {
        CliError::Usage("no example given (--example or [experiment] example)".into())
    })?;
    let seed = cfg.seed();
    let ks = cfg.ks();
    let out = run_experiment(example, &ks, &cfg.overrides(), cfg.workers())?;

    let dir = out_dir(&cfg, &format!("experiment-{example}"))?;
    let params = match example {
        Example::Linear => LinearRegression.param_names(),
        Example::Cure => WeibullCure.param_names(),
    };
    let comment = format!("{} example={example}", header(seed));
    write_records(&dir.join("records.csv"), &comment, params, &out.records)?;
    let table = aggregate(&out.records, &param_groups(params));
    write_aggregate_csv(&dir.join("aggregate.csv"), &comment, &table)?;
    write_samples_csv(&dir.join("samples.csv"), &comment, params, &out.samples)?;
    write_summary_toml(
        &dir.join("summary.toml"),
        &comment,
        &SummaryMeta::from_output(&out),
        &table,
    )?;
    save_config(&dir, &cfg)?;
    clock.finish(&dir, seed)?;

    let total = out.scenarios[0].replicates;
    println!(
        "{example}: {} records from {} replicates x {} shift levels -> {}",
        out.records.len(),
        total - out.failures.len(),
        ks.len(),
        dir.display()
    );
    if out.failures.is_empty() {
        Ok(())
    } else {
        for f in &out.failures {
            eprintln!("replicate {} failed: {}", f.replicate, f.message);
        }
        Err(CliError::Partial {
            failed: out.failures.len(),
            total,
        })
    }
}
