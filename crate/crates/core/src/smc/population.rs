use rayon::prelude::*;

use crate::model::Model;
use crate::rng::Stream;
use crate::stats::{LogWeights, ParticleSystem};
use crate::Result;

/// Cached log-density pieces of one particle. Likelihood terms that have not
/// been evaluated are NaN.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Components {
    pub log_prior: f64,
    pub target_ll: f64,
    pub source_ll: f64,
}

impl Components {
    pub const UNSET: Components = Components {
        log_prior: f64::NAN,
        target_ll: f64::NAN,
        source_ll: f64::NAN,
    };
}

/// Particle system plus the cached components of every particle.
#[derive(Debug, Clone)]
pub struct Population {
    pub particles: ParticleSystem,
    pub components: Vec<Components>,
}

impl Population {
    /// `n` independent prior draws; particle `i` uses `stream.child(i)`.
    pub fn from_prior<M: Model>(model: &M, n: usize, stream: Stream) -> Result<Self> {
        let rows: Vec<Vec<f64>> = (0..n)
            .into_par_iter()
            .map(|i| model.sample_prior(&mut stream.child(i as u64).rng()))
            .collect();
        let particles = ParticleSystem::from_rows(&rows)?;
        let components = rows
            .iter()
            .map(|r| Components {
                log_prior: model.log_prior(r),
                ..Components::UNSET
            })
            .collect();
        Ok(Population {
            particles,
            components,
        })
    }

    pub fn len(&self) -> usize {
        self.particles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.particles.is_empty()
    }

    /// Evaluates any missing target log-likelihoods.
    pub fn fill_target<M: Model>(&mut self, model: &M, data: &[M::Obs]) {
        let particles = &self.particles;
        self.components
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, c)| {
                if c.target_ll.is_nan() {
                    c.target_ll = model.log_lik(data, particles.row(i));
                }
            });
    }

    /// Evaluates any missing source log-likelihoods.
    pub fn fill_source<M: Model>(&mut self, model: &M, data: &[M::Obs]) {
        let particles = &self.particles;
        self.components
            .par_iter_mut()
            .enumerate()
            .for_each(|(i, c)| {
                if c.source_ll.is_nan() {
                    c.source_ll = model.log_lik(data, particles.row(i));
                }
            });
    }

    /// Equally weighted copy made of the particles at `indices`.
    pub fn select(&self, indices: &[usize]) -> Population {
        Population {
            particles: self.particles.select(indices),
            components: indices.iter().map(|&i| self.components[i]).collect(),
        }
    }

    pub fn with_log_weights(mut self, w: LogWeights) -> Population {
        self.particles.set_log_weights(w);
        self
    }

    pub fn target_ll(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.target_ll).collect()
    }

    pub fn source_ll(&self) -> Vec<f64> {
        self.components.iter().map(|c| c.source_ll).collect()
    }
}
