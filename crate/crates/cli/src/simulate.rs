use std::io::Write;

use clap::Args;
use tsmc_core::config::RunConfig;
use tsmc_core::experiments::{cure_pilot_s_hat, Example, ShiftScheme, DEFAULT_N_TARGET};
use tsmc_core::model::{
    generate_cure, generate_linear, write_dataset_to, Dataset, Observation, Role,
};
use tsmc_core::rng::Stream;

use crate::error::{CliError, Result};
use crate::output::write_text;

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// linear or cure.
    #[arg(long)]
    example: Example,

    /// target or source. Target data always come from the target parameters.
    #[arg(long, default_value = "target")]
    role: Role,

    /// Number of observations (default: 40 for target, the study's source size otherwise).
    #[arg(long)]
    n: Option<usize>,

    /// Shift level of the source parameters.
    #[arg(long, default_value_t = 0, conflicts_with = "theta")]
    k: u32,

    /// Explicit natural-scale parameters, comma separated.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    theta: Option<Vec<f64>>,

    /// Per-parameter shift scale, comma separated (cure default: pilot fit).
    #[arg(long, value_delimiter = ',')]
    s_hat: Option<Vec<f64>>,
}

fn theta(a: &SimulateArgs) -> Result<Vec<f64>> {
    if let Some(t) = &a.theta {
        if t.len() != a.example.theta_target().len() {
            return Err(CliError::Usage(format!(
                "--theta needs {} values for the {} example",
                a.example.theta_target().len(),
                a.example
            )));
        }
        return Ok(t.clone());
    }
    if a.role == Role::Target || a.k == 0 {
        return Ok(a.example.theta_target());
    }
    let scheme = match (a.example, &a.s_hat) {
        (e, Some(s)) => {
            if s.len() != e.theta_target().len() {
                return Err(CliError::Usage(format!(
                    "--s-hat needs {} values",
                    e.theta_target().len()
                )));
            }
            ShiftScheme {
                example: e,
                theta_target: e.theta_target(),
                s_hat: s.clone(),
            }
        }
        (Example::Linear, None) => ShiftScheme::linear(),
        (Example::Cure, None) => ShiftScheme::cure(cure_pilot_s_hat()?),
    };
    Ok(scheme.theta_source(a.k))
}

fn emit<O: Observation>(
    d: &Dataset<O>,
    seed: u64,
    notes: &[String],
    cfg: &RunConfig,
) -> Result<()> {
    let mut buf = Vec::new();
    write_dataset_to(&mut buf, d, seed, notes).expect("writing to memory");
    match &cfg.run.out {
        Some(path) => write_text(path, std::str::from_utf8(&buf).expect("utf-8")),
        None => std::io::stdout()
            .write_all(&buf)
            .map_err(|e| CliError::Usage(e.to_string())),
    }
}

pub fn run(a: SimulateArgs, cfg: RunConfig) -> Result<()> {
    let seed = cfg.seed();
    let theta = theta(&a)?;
    let n = a.n.unwrap_or(match a.role {
        Role::Target => DEFAULT_N_TARGET,
        Role::Source => a.example.default_n_source(),
    });
    let notes = vec![format!(
        "example={} k={} n={n} theta={}",
        a.example,
        a.k,
        theta
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(",")
    )];
    let mut rng = Stream::root(seed).named("simulate").rng();
    match a.example {
        Example::Linear => emit(
            &generate_linear(n, &theta, a.role, &mut rng)?,
            seed,
            &notes,
            &cfg,
        ),
        Example::Cure => emit(
            &generate_cure(n, &theta, a.role, &mut rng)?,
            seed,
            &notes,
            &cfg,
        ),
    }
}
