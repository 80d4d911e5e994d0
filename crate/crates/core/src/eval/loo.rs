use super::predictive::{pointwise_log_lik, ClppdMode, PointwiseLogLik};
use crate::model::Model;
use crate::rng::Stream;
use crate::smc::{mcmc_mutate, Components, LogTarget, MutationConfig, Population};
use crate::stats::{ess, log_sum_exp, stratified_resample, ParticleSystem};
use crate::{Error, Result};

/// Refresh kernel used after each leave-one-out resample.
pub const LOO_REFRESH: MutationConfig = MutationConfig {
    initial_steps: 3,
    delta: 1.0,
    max_steps: 200,
};

/// Held-out points whose reweighted ESS falls below this are counted.
pub const LOW_ESS: f64 = 10.0;

/// Power applied to the source likelihood in the posterior being scored.
#[derive(Debug, Clone, Copy)]
pub enum TransferWeight<'a> {
    /// No source term.
    None,
    Fixed(f64),
    /// One value per particle (joint draws with the transfer parameter).
    PerParticle(&'a [f64]),
}

impl TransferWeight<'_> {
    fn at(&self, j: usize) -> f64 {
        match self {
            TransferWeight::None => 0.0,
            TransferWeight::Fixed(a) => *a,
            TransferWeight::PerParticle(a) => a[j],
        }
    }

    fn any_positive(&self) -> bool {
        match self {
            TransferWeight::None => false,
            TransferWeight::Fixed(a) => *a > 0.0,
            TransferWeight::PerParticle(a) => a.iter().any(|&x| x > 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LooOutcome {
    /// Sum over held-out points of the log of the mean predictive density.
    pub value: f64,
    pub pointwise: Vec<f64>,
    /// Same sum with the mean of the log densities in place of the log of the mean.
    pub mean_of_log: f64,
    /// Held-out points whose reweighted ESS was below [`LOW_ESS`].
    pub low_ess: usize,
}

/// Leave-one-out target: `sum_{k != i} log p(y_k) + alpha_slot log p(y_S) + log prior`.
struct LeaveOneOut<'a, M: Model> {
    model: &'a M,
    target: &'a [M::Obs],
    source: &'a [M::Obs],
    held_out: usize,
    alphas: Vec<f64>,
}

impl<M: Model> LogTarget for LeaveOneOut<'_, M> {
    fn evaluate(&self, slot: usize, theta: &[f64]) -> Components {
        let log_prior = self.model.log_prior(theta);
        if log_prior == f64::NEG_INFINITY {
            return Components {
                log_prior,
                target_ll: f64::NEG_INFINITY,
                source_ll: f64::NEG_INFINITY,
            };
        }
        let target_ll = self.model.log_lik(self.target, theta)
            - self.model.log_lik_point(&self.target[self.held_out], theta);
        let source_ll = if self.alphas[slot] > 0.0 {
            self.model.log_lik(self.source, theta)
        } else {
            f64::NAN
        };
        Components {
            log_prior,
            target_ll,
            source_ll,
        }
    }

    #[inline]
    fn log_density(&self, slot: usize, c: &Components) -> f64 {
        let a = self.alphas[slot];
        if a > 0.0 {
            c.log_prior + c.target_ll + a * c.source_ll
        } else {
            c.log_prior + c.target_ll
        }
    }
}

/// Importance-sampled leave-one-out log predictive density of `target`.
///
/// `posterior` must condition on all of `target` (plus `source` raised to
/// `transfer`). For each held-out point the particles are reweighted by
/// `1 / p(y_i | theta)`, resampled, refreshed with [`LOO_REFRESH`] against the
/// leave-one-out posterior, and the predictive density of `y_i` is averaged
/// over the refreshed particles.
pub fn loo<M: Model>(
    model: &M,
    target: &[M::Obs],
    source: &[M::Obs],
    posterior: &ParticleSystem,
    transfer: TransferWeight<'_>,
    refresh: &MutationConfig,
    stream: Stream,
) -> Result<LooOutcome> {
    let n_particles = posterior.len();
    if let TransferWeight::PerParticle(a) = transfer {
        if a.len() != n_particles {
            return Err(Error::InvalidArgument(
                "one transfer weight per particle required".into(),
            ));
        }
    }
    let uses_source = transfer.any_positive();
    if uses_source && source.is_empty() {
        return Err(Error::InvalidArgument(
            "positive transfer weight but no source data".into(),
        ));
    }
    let base_w = posterior.log_weights().normalized()?;
    let ll: PointwiseLogLik = pointwise_log_lik(model, target, posterior);
    let components: Vec<Components> = posterior
        .rows()
        .enumerate()
        .map(|(j, theta)| Components {
            log_prior: model.log_prior(theta),
            target_ll: ll.particle(j).iter().sum(),
            source_ll: if transfer.at(j) > 0.0 {
                model.log_lik(source, theta)
            } else {
                f64::NAN
            },
        })
        .collect();

    let mut pointwise = Vec::with_capacity(target.len());
    let mut low_ess = 0;
    let mut mean_of_log = 0.0;
    let mut lw = vec![0.0; n_particles];
    for i in 0..target.len() {
        for (j, w) in lw.iter_mut().enumerate() {
            let l = ll.get(j, i);
            *w = if l.is_finite() {
                base_w.values()[j] - l
            } else {
                f64::NEG_INFINITY
            };
        }
        let lse = log_sum_exp(&lw)?;
        let weights: Vec<f64> = lw.iter().map(|v| (v - lse).exp()).collect();
        if ess(&weights)? < LOW_ESS {
            low_ess += 1;
        }
        let point_stream = stream.child(i as u64);
        let idx = stratified_resample(
            &weights,
            n_particles,
            &mut point_stream.named("resample").rng(),
        );
        let mut pop = Population {
            particles: posterior.select(&idx),
            components: idx
                .iter()
                .map(|&j| Components {
                    target_ll: components[j].target_ll - ll.get(j, i),
                    ..components[j]
                })
                .collect(),
        };
        let kernel = LeaveOneOut {
            model,
            target,
            source,
            held_out: i,
            alphas: idx.iter().map(|&j| transfer.at(j)).collect(),
        };
        pop = mcmc_mutate(&pop, &kernel, refresh, point_stream.named("refresh"))?.population;
        let held: Vec<f64> = pop
            .particles
            .rows()
            .map(|theta| model.log_lik_point(&target[i], theta))
            .collect();
        let v = log_sum_exp(&held).unwrap_or(f64::NEG_INFINITY) - (n_particles as f64).ln();
        pointwise.push(v);
        mean_of_log += held.iter().sum::<f64>() / n_particles as f64;
    }
    if low_ess > 0 {
        log::info!(
            "leave-one-out: {low_ess} of {} points had reweighted ESS < {LOW_ESS}",
            target.len()
        );
    }
    Ok(LooOutcome {
        value: pointwise.iter().sum(),
        pointwise,
        mean_of_log,
        low_ess,
    })
}

impl LooOutcome {
    /// The total under the given pointwise aggregation.
    pub fn score(&self, mode: ClppdMode) -> f64 {
        match mode {
            ClppdMode::LogOfMean => self.value,
            ClppdMode::MeanOfLog => self.mean_of_log,
        }
    }
}
