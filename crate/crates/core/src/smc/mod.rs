//! Adaptive likelihood-annealing SMC.

mod anneal;
mod mutate;
mod population;
mod target;
mod temper;

pub use anneal::{
    anneal_coupled, anneal_phase, run_smc, AnnealOutcome, AnnealStep, ChainSpec, Moving,
    SmcPosterior,
};
pub use mutate::{mcmc_mutate, remaining_steps, MutationConfig, MutationOutcome};
pub use population::{Components, Population};
pub use target::{AnnealedTarget, LogTarget};
pub use temper::{
    ess_after_increment, next_temperature, next_temperature_coupled, reweight_and_evidence,
    TemperatureChoice,
};

/// Settings shared by every annealing run.
#[derive(Debug, Clone, PartialEq)]
pub struct SmcConfig {
    pub particles: usize,
    /// Target ESS as a fraction of the particle count.
    pub ess_fraction: f64,
    pub mutation: MutationConfig,
}

impl SmcConfig {
    pub fn new(particles: usize) -> Self {
        SmcConfig {
            particles,
            ess_fraction: 0.5,
            mutation: MutationConfig::default(),
        }
    }

    pub fn target_ess(&self) -> f64 {
        self.ess_fraction * self.particles as f64
    }
}
