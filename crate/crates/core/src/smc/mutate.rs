use rayon::prelude::*;

use super::population::{Components, Population};
use super::target::LogTarget;
use crate::rng::{SmcRng, Stream};
use crate::stats::{weighted_mean_cov, CholeskyFactor};
use crate::{Error, Result};
use rand::Rng;

/// Self-tuning random-walk Metropolis settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MutationConfig {
    /// Initial step count `S` (>= 2); the first `S - 1` steps are the pilot.
    pub initial_steps: usize,
    /// Pseudo-count added to the pilot acceptances, in `[0, 1]`.
    pub delta: f64,
    /// Cap on the total number of steps per particle.
    pub max_steps: usize,
}

impl Default for MutationConfig {
    fn default() -> Self {
        MutationConfig {
            initial_steps: 5,
            delta: 1.0,
            max_steps: 200,
        }
    }
}

impl MutationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.initial_steps < 2 {
            return Err(Error::InvalidArgument("mutation needs S >= 2".into()));
        }
        if !(0.0..=1.0).contains(&self.delta) {
            return Err(Error::InvalidArgument(
                "mutation delta must lie in [0, 1]".into(),
            ));
        }
        if self.max_steps < self.initial_steps {
            return Err(Error::InvalidArgument("max_steps must be >= S".into()));
        }
        Ok(())
    }
}

/// Total step count `R = max(ceil(log 0.01 / log(1 - p)), S)` with
/// `p = (A + delta) / ((S - 1) N)`, clamped to `max_steps`. Returns `(R, clamped)`.
pub fn remaining_steps(
    accepted: usize,
    particles: usize,
    config: &MutationConfig,
) -> (usize, bool) {
    let s = config.initial_steps;
    let p = (accepted as f64 + config.delta) / ((s - 1) * particles) as f64;
    if p >= 1.0 {
        return (s, false);
    }
    if p <= 0.0 {
        return (config.max_steps, true);
    }
    let wanted = (0.01f64.ln() / (-p).ln_1p()).ceil();
    let r = if wanted.is_finite() {
        (wanted as usize).max(s)
    } else {
        usize::MAX
    };
    if r > config.max_steps {
        (config.max_steps, true)
    } else {
        (r, false)
    }
}

#[derive(Debug, Clone)]
pub struct MutationOutcome {
    pub population: Population,
    /// Pilot acceptances `A`.
    pub pilot_accepted: usize,
    /// Total steps per particle `R`.
    pub steps: usize,
    /// Whether `R` hit `max_steps`.
    pub clamped: bool,
    /// Acceptance rate over all steps.
    pub acceptance_rate: f64,
}

struct Walker {
    theta: Vec<f64>,
    components: Components,
    log_density: f64,
    rng: SmcRng,
    accepted: usize,
    proposal: Vec<f64>,
    z: Vec<f64>,
}

impl Walker {
    #[inline]
    fn step<T: LogTarget>(&mut self, slot: usize, target: &T, factor: &CholeskyFactor) -> bool {
        factor.sample_into(&self.theta, &mut self.rng, &mut self.z, &mut self.proposal);
        let comps = target.evaluate(slot, &self.proposal);
        let ld = target.log_density(slot, &comps);
        let u: f64 = self.rng.random();
        // NaN proposals compare false and are rejected
        if ld - self.log_density > u.ln() {
            std::mem::swap(&mut self.theta, &mut self.proposal);
            self.components = comps;
            self.log_density = ld;
            true
        } else {
            false
        }
    }
}

/// Random-walk Metropolis–Hastings move with a self-tuned step count.
///
/// The proposal covariance is the raw particle covariance, computed once.
/// Every particle runs `S - 1` pilot steps; the pooled acceptance count sets
/// the total `R` (see [`remaining_steps`]) and each particle continues to `R`
/// steps. Particle `i` draws from `stream.child(i)`, so the result does not
/// depend on how the work is scheduled.
pub fn mcmc_mutate<T: LogTarget>(
    population: &Population,
    target: &T,
    config: &MutationConfig,
    stream: Stream,
) -> Result<MutationOutcome> {
    config.validate()?;
    let n = population.len();
    let d = population.particles.dim();
    let factor = weighted_mean_cov(&population.particles)?.factor;

    let mut walkers: Vec<Walker> = (0..n)
        .into_par_iter()
        .map(|i| {
            let theta = population.particles.row(i).to_vec();
            let mut components = population.components[i];
            let mut log_density = target.log_density(i, &components);
            if log_density.is_nan() {
                components = target.evaluate(i, &theta);
                log_density = target.log_density(i, &components);
            }
            Walker {
                theta,
                components,
                log_density,
                rng: stream.child(i as u64).rng(),
                accepted: 0,
                proposal: vec![0.0; d],
                z: vec![0.0; d],
            }
        })
        .collect();

    let pilot = config.initial_steps - 1;
    walkers.par_iter_mut().enumerate().for_each(|(i, w)| {
        for _ in 0..pilot {
            if w.step(i, target, &factor) {
                w.accepted += 1;
            }
        }
    });
    let pilot_accepted: usize = walkers.iter().map(|w| w.accepted).sum();
    let (steps, clamped) = remaining_steps(pilot_accepted, n, config);
    log::trace!("pilot {pilot_accepted}/{} -> {steps} steps", pilot * n);
    if clamped {
        log::warn!(
            "mutation step count clamped to {steps} (pilot acceptance {pilot_accepted}/{})",
            pilot * n
        );
    }
    let extra = steps - pilot;
    walkers.par_iter_mut().enumerate().for_each(|(i, w)| {
        for _ in 0..extra {
            if w.step(i, target, &factor) {
                w.accepted += 1;
            }
        }
    });

    let total_accepted: usize = walkers.iter().map(|w| w.accepted).sum();
    let mut values = Vec::with_capacity(n * d);
    let mut components = Vec::with_capacity(n);
    for w in &walkers {
        values.extend_from_slice(&w.theta);
        components.push(w.components);
    }
    let particles = crate::stats::ParticleSystem::equally_weighted(d, values)?;
    Ok(MutationOutcome {
        population: Population {
            particles,
            components,
        },
        pilot_accepted,
        steps,
        clamped,
        acceptance_rate: total_accepted as f64 / (steps * n) as f64,
    })
}
