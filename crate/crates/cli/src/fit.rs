use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use serde::Serialize;
use tsmc_core::config::RunConfig;
use tsmc_core::experiments::{Example, DEFAULT_PARTICLES};
use tsmc_core::model::{format_real, read_dataset, LinearRegression, Model, Role, WeibullCure};
use tsmc_core::rng::Stream;
use tsmc_core::smc::{run_smc, SmcConfig};
use tsmc_core::stats::ParticleSystem;
use tsmc_core::tsmc::{grid_search_me, run_tsmc, sample_npp, BetaPrior, DEFAULT_GRID};

use crate::error::{CliError, Result};
use crate::output::{header, out_dir, save_config, write_text, Clock};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitMethod {
    /// Target data only.
    Bt,
    /// Source data only.
    Bs,
    /// Target and source pooled.
    Bu,
    /// Fixed power prior at the evidence-maximising transfer parameter.
    Fpp,
    /// Normalised power prior.
    Npp,
}

impl FitMethod {
    fn name(self) -> &'static str {
        match self {
            FitMethod::Bt => "bt",
            FitMethod::Bs => "bs",
            FitMethod::Bu => "bu",
            FitMethod::Fpp => "fpp",
            FitMethod::Npp => "npp",
        }
    }

    fn needs_target(self) -> bool {
        self != FitMethod::Bs
    }

    fn needs_source(self) -> bool {
        self != FitMethod::Bt
    }
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[arg(long, value_enum)]
    method: FitMethod,

    /// Model of the data files: linear or cure.
    #[arg(long)]
    example: Example,

    /// Target dataset CSV.
    #[arg(long)]
    target: Option<PathBuf>,

    /// Source dataset CSV.
    #[arg(long)]
    source: Option<PathBuf>,

    /// Particle count N.
    #[arg(long)]
    particles: Option<usize>,

    /// Grid size P for the evidence search (fpp).
    #[arg(long)]
    grid: Option<usize>,

    /// Joint draws (npp).
    #[arg(long)]
    npp_samples: Option<usize>,

    /// Beta prior on the transfer parameter (npp).
    #[arg(long)]
    npp_a: Option<f64>,
    #[arg(long)]
    npp_b: Option<f64>,
}

#[derive(Serialize)]
struct FitSummary {
    method: String,
    example: String,
    particles: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    log_evidence: Option<f64>,
    /// `log C_T` at the selected transfer parameter.
    #[serde(skip_serializing_if = "Option::is_none")]
    log_ct: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_star: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    alpha_mean: Option<f64>,
    param: toml::Table,
}

fn required(path: &Option<PathBuf>, flag: &str, method: FitMethod) -> Result<PathBuf> {
    let p = path
        .clone()
        .ok_or_else(|| CliError::Usage(format!("method {} needs --{flag}", method.name())))?;
    if !p.is_file() {
        return Err(CliError::Input {
            path: p,
            message: format!("{flag} dataset not found"),
        });
    }
    Ok(p)
}

/// Natural-scale weighted means and standard deviations.
fn moments<M: Model>(model: &M, post: &ParticleSystem) -> Result<Vec<(f64, f64)>> {
    let w = post.log_weights().weights()?;
    let nat: Vec<Vec<f64>> = post.rows().map(|r| model.constrain(r)).collect();
    Ok((0..model.dim())
        .map(|j| {
            let mean: f64 = nat.iter().zip(&w).map(|(r, w)| w * r[j]).sum();
            let var: f64 = nat
                .iter()
                .zip(&w)
                .map(|(r, w)| w * (r[j] - mean).powi(2))
                .sum();
            (mean, var.sqrt())
        })
        .collect())
}

fn write_posterior<M: Model>(
    path: &Path,
    seed: u64,
    model: &M,
    post: &ParticleSystem,
    alphas: Option<&[f64]>,
) -> Result<()> {
    let w = post.log_weights().weights()?;
    let mut text = format!("# {}\nweight", header(seed));
    for p in model.param_names() {
        text.push(',');
        text.push_str(p);
    }
    if alphas.is_some() {
        text.push_str(",alpha");
    }
    text.push('\n');
    for (i, row) in post.rows().enumerate() {
        text.push_str(&format_real(w[i]));
        for v in model.constrain(row) {
            let _ = write!(text, ",{}", format_real(v));
        }
        if let Some(a) = alphas {
            let _ = write!(text, ",{}", format_real(a[i]));
        }
        text.push('\n');
    }
    write_text(path, &text)
}

fn fit_with<M: Model>(model: &M, a: &FitArgs, cfg: &RunConfig, dir: &Path) -> Result<()> {
    let seed = cfg.seed();
    let target = if a.method.needs_target() {
        Some(read_dataset::<M::Obs>(
            &required(&a.target, "target", a.method)?,
            Role::Target,
        )?)
    } else {
        None
    };
    let source = if a.method.needs_source() {
        Some(read_dataset::<M::Obs>(
            &required(&a.source, "source", a.method)?,
            Role::Source,
        )?)
    } else {
        None
    };
    let sc = &cfg.scenario;
    let particles = sc.particles.unwrap_or(DEFAULT_PARTICLES);
    let smc = SmcConfig::new(particles);
    let stream = Stream::root(seed).named("fit");
    let mut summary = FitSummary {
        method: a.method.name().into(),
        example: a.example.to_string(),
        particles,
        log_evidence: None,
        log_ct: None,
        alpha_star: None,
        alpha_mean: None,
        param: toml::Table::new(),
    };
    let (post, alphas) = match a.method {
        FitMethod::Bt | FitMethod::Bs | FitMethod::Bu => {
            let data = match (&target, &source) {
                (Some(t), Some(s)) => t.concat(s),
                (Some(d), None) | (None, Some(d)) => d.clone(),
                (None, None) => unreachable!("every method reads at least one dataset"),
            };
            let post = run_smc(model, data.observations(), &smc, stream)?;
            summary.log_evidence = Some(post.log_evidence);
            (post.population.particles, None)
        }
        FitMethod::Fpp | FitMethod::Npp => {
            let (t, s) = (
                target.as_ref().expect("target"),
                source.as_ref().expect("source"),
            );
            let trace = run_tsmc(
                model,
                t.observations(),
                s.observations(),
                &smc,
                stream.key(),
            )?;
            trace.save(&dir.join("trace.bin"))?;
            if a.method == FitMethod::Fpp {
                let fpp = grid_search_me(&trace, sc.grid.unwrap_or(DEFAULT_GRID))?;
                summary.alpha_star = Some(fpp.alpha_star);
                summary.log_ct = Some(fpp.update.log_ct());
                (fpp.update.posterior(&trace)?, None)
            } else {
                let prior = BetaPrior {
                    a: sc.npp_a.unwrap_or(1.0),
                    b: sc.npp_b.unwrap_or(1.0),
                };
                let npp = sample_npp(
                    &trace,
                    sc.npp_samples.unwrap_or(particles),
                    prior,
                    stream.named("npp"),
                )?;
                summary.alpha_mean = Some(npp.alpha_mean());
                (npp.particles.clone(), Some(npp.alphas))
            }
        }
    };
    write_posterior(
        &dir.join("posterior.csv"),
        seed,
        model,
        &post,
        alphas.as_deref(),
    )?;

    println!("method {} ({} particles)", a.method.name(), particles);
    for (name, (mean, sd)) in model.param_names().iter().zip(moments(model, &post)?) {
        println!("{name:>8}  mean {mean:>12.5}  sd {sd:>10.5}");
        let mut t = toml::Table::new();
        t.insert("mean".into(), mean.into());
        t.insert("sd".into(), sd.into());
        summary.param.insert((*name).into(), t.into());
    }
    if let Some(x) = summary.alpha_star {
        println!("alpha* = {x:.4}");
    }
    if let Some(x) = summary.alpha_mean {
        println!("posterior mean alpha = {x:.4}");
    }
    let text = toml::to_string(&summary).map_err(|e| CliError::Usage(e.to_string()))?;
    write_text(
        &dir.join("summary.toml"),
        &format!("# {}\n{text}", header(seed)),
    )
}

pub fn run(a: FitArgs, mut cfg: RunConfig) -> Result<()> {
    let clock = Clock::start("fit");
    let sc = &mut cfg.scenario;
    for (slot, flag) in [
        (&mut sc.particles, a.particles),
        (&mut sc.grid, a.grid),
        (&mut sc.npp_samples, a.npp_samples),
    ] {
        if flag.is_some() {
            *slot = flag;
        }
    }
    if a.npp_a.is_some() {
        sc.npp_a = a.npp_a;
    }
    if a.npp_b.is_some() {
        sc.npp_b = a.npp_b;
    }
    cfg.experiment.example = Some(a.example);
    // fail on missing inputs before creating anything
    if a.method.needs_target() {
        required(&a.target, "target", a.method)?;
    }
    if a.method.needs_source() {
        required(&a.source, "source", a.method)?;
    }
    let dir = out_dir(&cfg, &format!("fit-{}", a.method.name()))?;
    match a.example {
        Example::Linear => fit_with(&LinearRegression, &a, &cfg, &dir)?,
        Example::Cure => fit_with(&WeibullCure, &a, &cfg, &dir)?,
    }
    save_config(&dir, &cfg)?;
    clock.finish(&dir, cfg.seed())
}
