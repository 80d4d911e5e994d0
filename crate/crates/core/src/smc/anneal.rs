use super::mutate::mcmc_mutate;
use super::population::Population;
use super::target::AnnealedTarget;
use super::temper::{next_temperature_coupled, reweight_and_evidence};
use super::SmcConfig;
use crate::model::Model;
use crate::rng::Stream;
use crate::stats::stratified_resample;
use crate::{Error, Result};

/// Upper bound on the rungs of one anneal.
pub const MAX_RUNGS: usize = 10_000;

/// Which temperature a phase moves.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Moving {
    /// Target-likelihood temperature.
    Gamma,
    /// Source-likelihood temperature.
    Alpha,
}

impl Moving {
    fn symbol(self) -> &'static str {
        match self {
            Moving::Gamma => "gamma",
            Moving::Alpha => "alpha",
        }
    }

    /// `(gamma, alpha)` given the moving and fixed temperatures.
    fn pair(self, moving: f64, fixed: f64) -> (f64, f64) {
        match self {
            Moving::Gamma => (moving, fixed),
            Moving::Alpha => (fixed, moving),
        }
    }
}

/// A chain entering an anneal: its population, the value of the temperature
/// that stays fixed, and its running log normalising constant.
#[derive(Debug, Clone)]
pub struct ChainSpec {
    pub population: Population,
    pub fixed: f64,
    pub log_evidence: f64,
}

/// One rung of an anneal.
#[derive(Debug, Clone)]
pub struct AnnealStep {
    pub temperature: f64,
    /// Post-mutation, equally weighted.
    pub population: Population,
    pub log_evidence: f64,
    /// ESS after reweighting, before resampling.
    pub ess: f64,
    pub mutation_steps: usize,
    pub acceptance_rate: f64,
}

#[derive(Debug, Clone)]
pub struct AnnealOutcome {
    pub steps: Vec<AnnealStep>,
}

impl AnnealOutcome {
    pub fn temperatures(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.temperature).collect()
    }

    pub fn last(&self) -> &AnnealStep {
        self.steps.last().expect("an anneal has at least one rung")
    }
}

fn increments(population: &Population, moving: Moving) -> Vec<f64> {
    population
        .components
        .iter()
        .map(|c| {
            let v = match moving {
                Moving::Gamma => c.target_ll,
                Moving::Alpha => c.source_ll,
            };
            if v.is_nan() {
                f64::NEG_INFINITY
            } else {
                v
            }
        })
        .collect()
}

/// Anneals several chains in lockstep from `start` to 1. Each rung is chosen
/// so that the smallest ESS across chains stays at the configured target;
/// then every chain is reweighted, evidence-updated, resampled and mutated.
///
/// Chain `c` draws from `stream.child(c)`.
#[allow(clippy::too_many_arguments)]
pub fn anneal_coupled<M: Model>(
    model: &M,
    target: &[M::Obs],
    source: &[M::Obs],
    chains: Vec<ChainSpec>,
    moving: Moving,
    start: f64,
    config: &SmcConfig,
    stream: Stream,
) -> Result<Vec<AnnealOutcome>> {
    if !(0.0..1.0).contains(&start) {
        return Err(Error::InvalidArgument(format!(
            "anneal start {start} outside [0, 1)"
        )));
    }
    if chains.is_empty() {
        return Err(Error::InvalidArgument(
            "anneal needs at least one chain".into(),
        ));
    }
    let mut states: Vec<(Population, f64)> = chains
        .iter()
        .map(|c| (c.population.clone(), c.log_evidence))
        .collect();
    let fixed: Vec<f64> = chains.iter().map(|c| c.fixed).collect();
    let mut outcomes: Vec<AnnealOutcome> = chains
        .iter()
        .map(|_| AnnealOutcome { steps: Vec::new() })
        .collect();

    let mut current = start;
    let mut rung = 0u64;
    while current < 1.0 {
        if rung as usize >= MAX_RUNGS {
            return Err(Error::DegenerateWeights(format!(
                "{} stalled at {current} after {MAX_RUNGS} rungs",
                moving.symbol()
            )));
        }
        let mut incrs = Vec::with_capacity(states.len());
        let mut log_ws = Vec::with_capacity(states.len());
        for (pop, _) in states.iter_mut() {
            match moving {
                Moving::Gamma => pop.fill_target(model, target),
                Moving::Alpha => pop.fill_source(model, source),
            }
            incrs.push(increments(pop, moving));
            log_ws.push(pop.particles.log_weights().normalized()?.into_inner());
        }
        let pairs: Vec<(&[f64], &[f64])> = log_ws
            .iter()
            .zip(&incrs)
            .map(|(w, i)| (&w[..], &i[..]))
            .collect();
        let n = states[0].0.len();
        let choice = next_temperature_coupled(&pairs, current, config.ess_fraction * n as f64)?;
        let tau = choice.value;
        let delta = tau - current;

        for (c, (pop, log_z)) in states.iter_mut().enumerate() {
            let chain_stream = stream.child(c as u64).child(rung);
            let degenerate = |e: Error| {
                Error::DegenerateWeights(format!("chain {c} at {} = {tau}: {e}", moving.symbol()))
            };
            let (new_w, new_z) =
                reweight_and_evidence(pop.particles.log_weights(), &incrs[c], delta, *log_z)
                    .map_err(degenerate)?;
            let weights = new_w.weights().map_err(degenerate)?;
            let ess = crate::stats::ess(&weights)?;
            let idx = stratified_resample(
                &weights,
                pop.len(),
                &mut chain_stream.named("resample").rng(),
            );
            let resampled = pop.select(&idx);
            let (gamma, alpha) = moving.pair(tau, fixed[c]);
            let kernel_target = AnnealedTarget::new(model, target, source, gamma, alpha);
            let mutated = mcmc_mutate(
                &resampled,
                &kernel_target,
                &config.mutation,
                chain_stream.named("mutate"),
            )
            .map_err(degenerate)?;
            *pop = mutated.population;
            *log_z = new_z;
            outcomes[c].steps.push(AnnealStep {
                temperature: tau,
                population: pop.clone(),
                log_evidence: new_z,
                ess,
                mutation_steps: mutated.steps,
                acceptance_rate: mutated.acceptance_rate,
            });
        }
        log::debug!("{} -> {tau} (rung {rung})", moving.symbol());
        current = tau;
        rung += 1;
    }
    Ok(outcomes)
}

/// Single-chain anneal.
#[allow(clippy::too_many_arguments)]
pub fn anneal_phase<M: Model>(
    model: &M,
    target: &[M::Obs],
    source: &[M::Obs],
    chain: ChainSpec,
    moving: Moving,
    start: f64,
    config: &SmcConfig,
    stream: Stream,
) -> Result<AnnealOutcome> {
    let mut out = anneal_coupled(
        model,
        target,
        source,
        vec![chain],
        moving,
        start,
        config,
        stream,
    )?;
    Ok(out.remove(0))
}

/// Posterior from a standard prior-to-posterior anneal.
#[derive(Debug, Clone)]
pub struct SmcPosterior {
    pub population: Population,
    pub log_evidence: f64,
    pub temperatures: Vec<f64>,
}

/// Anneals `data`'s likelihood from 0 to 1, starting from prior draws.
pub fn run_smc<M: Model>(
    model: &M,
    data: &[M::Obs],
    config: &SmcConfig,
    stream: Stream,
) -> Result<SmcPosterior> {
    if data.is_empty() {
        return Err(Error::InvalidArgument("run_smc needs data".into()));
    }
    let population = Population::from_prior(model, config.particles, stream.named("prior"))?;
    let chain = ChainSpec {
        population,
        fixed: 0.0,
        log_evidence: 0.0,
    };
    let outcome = anneal_phase(
        model,
        data,
        &[],
        chain,
        Moving::Gamma,
        0.0,
        config,
        stream.named("anneal"),
    )?;
    let temperatures = outcome.temperatures();
    let last = outcome
        .steps
        .into_iter()
        .next_back()
        .expect("at least one rung");
    Ok(SmcPosterior {
        population: last.population,
        log_evidence: last.log_evidence,
        temperatures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{NormalMean, ScalarObservation};

    fn data(ys: &[f64]) -> Vec<ScalarObservation> {
        ys.iter().map(|&y| ScalarObservation { y }).collect()
    }

    /// Closed-form log marginal likelihood of the normal-mean model.
    fn log_evidence(m: &NormalMean, ys: &[f64]) -> f64 {
        let n = ys.len() as f64;
        let (s2, t2) = (m.sd * m.sd, m.prior_sd * m.prior_sd);
        let ybar = ys.iter().sum::<f64>() / n;
        let ss: f64 = ys.iter().map(|y| (y - ybar).powi(2)).sum();
        -0.5 * n * (2.0 * std::f64::consts::PI * s2).ln()
            - 0.5 * ss / s2
            - 0.5 * ((s2 + n * t2) / s2).ln()
            - 0.5 * n * (ybar - m.prior_mean).powi(2) / (s2 + n * t2)
    }

    #[test]
    fn conjugate_evidence_and_posterior() {
        let m = NormalMean {
            sd: 1.0,
            prior_mean: 0.0,
            prior_sd: 3.0,
        };
        let ys = [1.2, 0.4, 2.2, 1.7, 0.9, 1.4, 2.8, 0.1];
        let post = run_smc(&m, &data(&ys), &SmcConfig::new(1000), Stream::root(3)).unwrap();
        let exact = log_evidence(&m, &ys);
        assert!(
            ((post.log_evidence - exact) / exact).abs() < 0.03,
            "{} vs {exact}",
            post.log_evidence
        );
        let n = ys.len() as f64;
        let prec = n + 1.0 / 9.0;
        let mean = ys.iter().sum::<f64>() / prec;
        let got = post.population.particles.column(0).iter().sum::<f64>() / 1000.0;
        assert!((got - mean).abs() < 4.0 * (1.0 / prec).sqrt() / 1000f64.sqrt() * 3.0);
        let t = &post.temperatures;
        assert_eq!(*t.last().unwrap(), 1.0);
        assert!(t.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn constant_likelihood_takes_one_rung() {
        // cached source log-likelihoods are pinned to a constant
        let m = NormalMean {
            sd: 1.0,
            prior_mean: 0.0,
            prior_sd: 1.0,
        };
        let mut pop = Population::from_prior(&m, 200, Stream::root(1)).unwrap();
        for c in &mut pop.components {
            c.source_ll = -2.5;
        }
        let out = anneal_phase(
            &m,
            &[],
            &data(&[0.0]),
            ChainSpec {
                population: pop,
                fixed: 0.0,
                log_evidence: 0.0,
            },
            Moving::Alpha,
            0.0,
            &SmcConfig::new(200),
            Stream::root(2),
        );
        let out = out.unwrap();
        assert_eq!(out.steps.len(), 1);
        assert_eq!(out.steps[0].temperature, 1.0);
        assert!((out.steps[0].log_evidence + 2.5).abs() < 1e-12);
    }

    #[test]
    fn replay_is_identical() {
        let m = NormalMean {
            sd: 0.5,
            prior_mean: 1.0,
            prior_sd: 2.0,
        };
        let d = data(&[0.3, 0.5, 1.9, -0.2]);
        let a = run_smc(&m, &d, &SmcConfig::new(300), Stream::root(77)).unwrap();
        let b = run_smc(&m, &d, &SmcConfig::new(300), Stream::root(77)).unwrap();
        assert_eq!(a.temperatures, b.temperatures);
        assert_eq!(a.log_evidence.to_bits(), b.log_evidence.to_bits());
        assert_eq!(
            a.population.particles.values(),
            b.population.particles.values()
        );
    }

    #[test]
    fn intermediate_rungs_hit_the_ess_target() {
        let m = NormalMean {
            sd: 0.3,
            prior_mean: 0.0,
            prior_sd: 5.0,
        };
        let d = data(&[2.0, 2.1, 1.8, 2.4, 1.9, 2.2]);
        let pop = Population::from_prior(&m, 400, Stream::root(5)).unwrap();
        let out = anneal_phase(
            &m,
            &d,
            &[],
            ChainSpec {
                population: pop,
                fixed: 0.0,
                log_evidence: 0.0,
            },
            Moving::Gamma,
            0.0,
            &SmcConfig::new(400),
            Stream::root(6),
        )
        .unwrap();
        assert!(out.steps.len() > 1);
        for s in &out.steps[..out.steps.len() - 1] {
            assert!((s.ess - 200.0).abs() <= 1.0, "ess {}", s.ess);
        }
    }
}
