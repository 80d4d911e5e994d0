use super::trace::{Rung, Snapshot, TsmcTrace};
use crate::model::Model;
use crate::rng::Stream;
use crate::smc::{anneal_coupled, anneal_phase, ChainSpec, Moving, Population, SmcConfig};
use crate::{Error, Result};

pub const MIN_PARTICLES: usize = 100;

/// Result of the first phase: chain 1 annealed on the target data alone.
#[derive(Debug, Clone)]
pub struct TargetPhase {
    pub gamma_ladder: Vec<f64>,
    pub log_evidence: f64,
    /// Equally weighted target-only posterior.
    pub population: Population,
    seed: u64,
}

impl TargetPhase {
    pub fn seed(&self) -> u64 {
        self.seed
    }
}

fn check_particles(config: &SmcConfig) -> Result<()> {
    if config.particles < MIN_PARTICLES {
        return Err(Error::InvalidArgument(format!(
            "transfer sampler needs at least {MIN_PARTICLES} particles, got {}",
            config.particles
        )));
    }
    Ok(())
}

/// First phase: anneals the target likelihood on chain 1 from the prior.
/// Depends only on the target data and `seed`, so it can be shared between
/// runs that differ only in the source data.
pub fn run_target_phase<M: Model>(
    model: &M,
    target: &[M::Obs],
    config: &SmcConfig,
    seed: u64,
) -> Result<TargetPhase> {
    check_particles(config)?;
    if target.is_empty() {
        return Err(Error::InvalidArgument(
            "target data must be non-empty".into(),
        ));
    }
    let stream = Stream::root(seed);
    let prior1 = Population::from_prior(model, config.particles, stream.named("chain1-prior"))?;
    let phase1 = anneal_phase(
        model,
        target,
        &[],
        ChainSpec {
            population: prior1,
            fixed: 0.0,
            log_evidence: 0.0,
        },
        Moving::Gamma,
        0.0,
        config,
        stream.named("phase1"),
    )?;
    let mut gamma_ladder = vec![0.0];
    gamma_ladder.extend(phase1.temperatures());
    let last = phase1
        .steps
        .into_iter()
        .next_back()
        .expect("at least one rung");
    Ok(TargetPhase {
        gamma_ladder,
        log_evidence: last.log_evidence,
        population: last.population,
        seed,
    })
}

/// Second phase: anneals the source likelihood on both chains, chain 1
/// starting from the target-only posterior and chain 0 from the prior.
pub fn run_source_phase<M: Model>(
    model: &M,
    target: &[M::Obs],
    source: &[M::Obs],
    phase1: &TargetPhase,
    config: &SmcConfig,
) -> Result<TsmcTrace> {
    check_particles(config)?;
    if source.is_empty() {
        return Err(Error::InvalidArgument(
            "source data must be non-empty".into(),
        ));
    }
    if phase1.population.len() != config.particles {
        return Err(Error::InvalidArgument(
            "first-phase population size differs from the config".into(),
        ));
    }
    let stream = Stream::root(phase1.seed);
    let n = config.particles;
    let target_log_evidence = phase1.log_evidence;
    let mut chain1 = phase1.population.clone();
    chain1.fill_source(model, source);

    let mut chain0 = Population::from_prior(model, n, stream.named("chain0-prior"))?;
    chain0.fill_source(model, source);

    let mut rungs = vec![Rung {
        alpha: 0.0,
        chain0: Snapshot::from_population(&chain0),
        chain1: Snapshot::from_population(&chain1),
        log_c0: 0.0,
        log_c1: target_log_evidence,
        ess: [n as f64; 2],
    }];

    let outcomes = anneal_coupled(
        model,
        target,
        source,
        vec![
            ChainSpec {
                population: chain0,
                fixed: 0.0,
                log_evidence: 0.0,
            },
            ChainSpec {
                population: chain1,
                fixed: 1.0,
                log_evidence: target_log_evidence,
            },
        ],
        Moving::Alpha,
        0.0,
        config,
        stream.named("phase2"),
    )?;
    let [o0, o1]: [_; 2] = outcomes.try_into().expect("two chains");
    for (s0, s1) in o0.steps.iter().zip(&o1.steps) {
        rungs.push(Rung {
            alpha: s0.temperature,
            chain0: Snapshot::from_population(&s0.population),
            chain1: Snapshot::from_population(&s1.population),
            log_c0: s0.log_evidence,
            log_c1: s1.log_evidence,
            ess: [s0.ess, s1.ess],
        });
    }
    log::debug!(
        "transfer sampler: {} gamma rungs, {} alpha rungs",
        phase1.gamma_ladder.len(),
        rungs.len()
    );
    Ok(TsmcTrace {
        model: model.name().to_string(),
        seed: phase1.seed,
        particles: n,
        dim: model.dim(),
        gamma_ladder: phase1.gamma_ladder.clone(),
        target_log_evidence,
        rungs,
    })
}

/// Runs both phases of the transfer sampler and stores every rung.
pub fn run_tsmc<M: Model>(
    model: &M,
    target: &[M::Obs],
    source: &[M::Obs],
    config: &SmcConfig,
    seed: u64,
) -> Result<TsmcTrace> {
    if source.is_empty() {
        return Err(Error::InvalidArgument(
            "source data must be non-empty".into(),
        ));
    }
    let phase1 = run_target_phase(model, target, config, seed)?;
    run_source_phase(model, target, source, &phase1, config)
}
