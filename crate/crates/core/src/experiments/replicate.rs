use rayon::prelude::*;

use super::scenario::{make_scenario, Example, ScenarioConfig, ScenarioOverrides};
use crate::eval::{
    clppd, loo, parameter_metrics, Method, MetricsRecord, ParameterMetrics, TransferWeight,
    LOO_REFRESH,
};
use crate::model::{
    generate_cure, generate_linear, Dataset, LinearRegression, Model, Role, WeibullCure,
};
use crate::rng::{SmcRng, Stream};
use crate::smc::{run_smc, SmcConfig};
use crate::stats::{stratified_resample, ParticleSystem};
use crate::tsmc::{grid_search_me, run_source_phase, run_target_phase, sample_npp};
use crate::{Error, Result};

/// Natural-scale posterior draws of one method, kept for plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodSamples {
    pub k: u32,
    pub method: Method,
    pub natural: Vec<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReplicateOutput {
    pub replicate: usize,
    pub records: Vec<MetricsRecord>,
    pub samples: Vec<MethodSamples>,
}

struct Scored {
    metrics: ParameterMetrics,
    clppd: f64,
    loo: f64,
    natural: Vec<Vec<f64>>,
}

enum LooKind<'a> {
    Refresh(TransferWeight<'a>),
    /// The posterior ignores the target data, so the leave-one-out weights
    /// are uniform and the score equals the in-sample one.
    SameAsClppd,
}

#[allow(clippy::too_many_arguments)]
fn score<M: Model>(
    model: &M,
    target: &[M::Obs],
    source: &[M::Obs],
    posterior: &ParticleSystem,
    kind: LooKind<'_>,
    cfg: &ScenarioConfig,
    stream: Stream,
    keep: bool,
) -> Result<Scored> {
    let equal = if posterior.log_weights().is_uniform() {
        posterior.clone()
    } else {
        let w = posterior.log_weights().weights()?;
        let idx = stratified_resample(&w, posterior.len(), &mut stream.named("equalize").rng());
        posterior.select(&idx)
    };
    let metrics = parameter_metrics(model, &equal, cfg.theta_target())?;
    let in_sample = clppd(model, target, posterior, cfg.clppd_mode)?;
    let loo_value = match kind {
        LooKind::SameAsClppd => in_sample,
        LooKind::Refresh(weight) => loo(
            model,
            target,
            source,
            posterior,
            weight,
            &LOO_REFRESH,
            stream.named("loo"),
        )?
        .score(cfg.clppd_mode),
    };
    let natural = if keep {
        equal.rows().map(|r| model.constrain(r)).collect()
    } else {
        Vec::new()
    };
    Ok(Scored {
        metrics,
        clppd: in_sample,
        loo: loo_value,
        natural,
    })
}

fn record(cfg: &ScenarioConfig, replicate: usize, method: Method, s: &Scored) -> MetricsRecord {
    MetricsRecord {
        scenario_id: cfg.id(),
        k: cfg.k,
        replicate,
        method,
        bias: s.metrics.bias.clone(),
        mse: s.metrics.mse.clone(),
        stdev: s.metrics.stdev.clone(),
        coverage: s.metrics.coverage.clone(),
        clppd: s.clppd,
        loo: s.loo,
    }
}

fn replicate_with<M, G>(
    model: &M,
    generate: G,
    scenarios: &[ScenarioConfig],
    rep: usize,
    keep: bool,
) -> Result<ReplicateOutput>
where
    M: Model,
    G: Fn(usize, &[f64], Role, &mut SmcRng) -> Result<Dataset<M::Obs>>,
{
    let base = &scenarios[0];
    let root = Stream::root(base.root_seed);
    let target = generate(
        base.n_target,
        base.theta_target(),
        Role::Target,
        &mut root.named("target").child(rep as u64).rng(),
    )?;
    let aux = generate(
        base.n_source,
        base.theta_target(),
        Role::Source,
        &mut root.named("aux").child(rep as u64).rng(),
    )?;
    let smc = SmcConfig::new(base.particles);
    let (t, a) = (target.observations(), aux.observations());

    // True and BT do not depend on the source data, so they are shared by all k.
    let pooled = target.concat(&aux);
    let truth_post = run_smc(
        model,
        pooled.observations(),
        &smc,
        root.named("true").child(rep as u64),
    )?;
    let loo_stream = |m: Method, k: u32| {
        root.named("eval")
            .child(rep as u64)
            .child(u64::from(k))
            .named(m.label())
    };
    let truth = score(
        model,
        t,
        a,
        &truth_post.population.particles,
        LooKind::Refresh(TransferWeight::Fixed(1.0)),
        base,
        loo_stream(Method::True, 0),
        keep,
    )?;
    let phase1 = run_target_phase(model, t, &smc, root.named("tsmc").child(rep as u64).key())?;
    let bt = score(
        model,
        t,
        &[],
        &phase1.population.particles,
        LooKind::Refresh(TransferWeight::None),
        base,
        loo_stream(Method::Bt, 0),
        keep,
    )?;

    let mut out = ReplicateOutput {
        replicate: rep,
        records: Vec::new(),
        samples: Vec::new(),
    };
    for cfg in scenarios {
        let source = generate(
            cfg.n_source,
            &cfg.theta_source,
            Role::Source,
            &mut root.named("source").child(rep as u64).rng(),
        )?;
        let s = source.observations();
        let trace = run_source_phase(model, t, s, &phase1, &smc)?;
        let last = trace.rungs.len() - 1;

        let bs = score(
            model,
            t,
            s,
            &trace.chain0_particles(last)?,
            LooKind::SameAsClppd,
            cfg,
            loo_stream(Method::Bs, cfg.k),
            keep,
        )?;
        let bu = score(
            model,
            t,
            s,
            &trace.chain1_particles(last)?,
            LooKind::Refresh(TransferWeight::Fixed(1.0)),
            cfg,
            loo_stream(Method::Bu, cfg.k),
            keep,
        )?;
        let fpp = grid_search_me(&trace, cfg.grid)?;
        let fpp_scored = score(
            model,
            t,
            s,
            &fpp.update.posterior(&trace)?,
            LooKind::Refresh(TransferWeight::Fixed(fpp.alpha_star)),
            cfg,
            loo_stream(Method::Fpp, cfg.k),
            keep,
        )?;
        let npp = sample_npp(
            &trace,
            cfg.npp_samples,
            cfg.npp_prior,
            root.named("npp").child(rep as u64).child(u64::from(cfg.k)),
        )?;
        let npp_scored = score(
            model,
            t,
            s,
            &npp.particles,
            LooKind::Refresh(TransferWeight::PerParticle(&npp.alphas)),
            cfg,
            loo_stream(Method::Npp, cfg.k),
            keep,
        )?;
        log::debug!(
            "replicate {rep} {}: alpha* = {:.3}, NPP mean alpha = {:.3}",
            cfg.id(),
            fpp.alpha_star,
            npp.alpha_mean()
        );
        for (method, sc) in [
            (Method::True, &truth),
            (Method::Bt, &bt),
            (Method::Bs, &bs),
            (Method::Bu, &bu),
            (Method::Fpp, &fpp_scored),
            (Method::Npp, &npp_scored),
        ] {
            out.records.push(record(cfg, rep, method, sc));
            if keep {
                out.samples.push(MethodSamples {
                    k: cfg.k,
                    method,
                    natural: sc.natural.clone(),
                });
            }
        }
    }
    Ok(out)
}

/// Runs one replicate for every scenario in `scenarios`, which must differ
/// only in `k`. Target data, the True fit and the target-only fit are shared
/// across them.
pub fn run_replicate_all_k(
    scenarios: &[ScenarioConfig],
    replicate: usize,
    keep_samples: bool,
) -> Result<ReplicateOutput> {
    let Some(base) = scenarios.first() else {
        return Err(Error::InvalidArgument("no scenarios".into()));
    };
    match base.example {
        Example::Linear => replicate_with(
            &LinearRegression,
            generate_linear,
            scenarios,
            replicate,
            keep_samples,
        ),
        Example::Cure => replicate_with(
            &WeibullCure,
            generate_cure,
            scenarios,
            replicate,
            keep_samples,
        ),
    }
}

/// The six metric records of one replicate of one scenario.
pub fn run_replicate(config: &ScenarioConfig, replicate: usize) -> Result<Vec<MetricsRecord>> {
    Ok(run_replicate_all_k(std::slice::from_ref(config), replicate, false)?.records)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Failure {
    pub replicate: usize,
    pub message: String,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub scenarios: Vec<ScenarioConfig>,
    /// Ordered by replicate, then k, then method.
    pub records: Vec<MetricsRecord>,
    pub failures: Vec<Failure>,
    /// Posterior draws from replicate 0 (when it succeeded).
    pub samples: Vec<MethodSamples>,
}

/// Runs every replicate of every `k` on a pool of `workers` threads. Results
/// do not depend on `workers`. Failed replicates are reported, not retried.
pub fn run_experiment(
    example: Example,
    ks: &[u32],
    overrides: &ScenarioOverrides,
    workers: usize,
) -> Result<ExperimentOutput> {
    if ks.is_empty() {
        return Err(Error::InvalidArgument("no shift levels requested".into()));
    }
    let scenarios = ks
        .iter()
        .map(|&k| make_scenario(example, k, overrides))
        .collect::<Result<Vec<_>>>()?;
    let replicates = scenarios[0].replicates;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results: Vec<Result<ReplicateOutput>> = pool.install(|| {
        (0..replicates)
            .into_par_iter()
            .map(|r| {
                let out = run_replicate_all_k(&scenarios, r, r == 0);
                log::info!("{example} replicate {r} done");
                out
            })
            .collect()
    });
    let mut output = ExperimentOutput {
        scenarios,
        records: Vec::new(),
        failures: Vec::new(),
        samples: Vec::new(),
    };
    for (r, res) in results.into_iter().enumerate() {
        match res {
            Ok(rep) => {
                output.records.extend(rep.records);
                output.samples.extend(rep.samples);
            }
            Err(e) => {
                log::warn!("replicate {r} failed and is excluded: {e}");
                output.failures.push(Failure {
                    replicate: r,
                    message: e.to_string(),
                });
            }
        }
    }
    Ok(output)
}
