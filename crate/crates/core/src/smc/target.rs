use super::population::Components;
use crate::model::Model;

/// Log-density used by the mutation kernel. `slot` is the particle's position
/// in the population, so per-particle targets (e.g. a per-particle transfer
/// parameter) are possible.
pub trait LogTarget: Sync {
    fn evaluate(&self, slot: usize, theta: &[f64]) -> Components;

    fn log_density(&self, slot: usize, components: &Components) -> f64;
}

/// `gamma * log p(y_T | theta) + alpha * log p(y_S | theta) + log prior(theta)`.
///
/// A likelihood whose temperature is zero is neither evaluated nor included.
pub struct AnnealedTarget<'a, M: Model> {
    pub model: &'a M,
    pub target: &'a [M::Obs],
    pub source: &'a [M::Obs],
    pub gamma: f64,
    pub alpha: f64,
}

impl<M: Model> Clone for AnnealedTarget<'_, M> {
    fn clone(&self) -> Self {
        AnnealedTarget { ..*self }
    }
}

impl<'a, M: Model> AnnealedTarget<'a, M> {
    pub fn new(
        model: &'a M,
        target: &'a [M::Obs],
        source: &'a [M::Obs],
        gamma: f64,
        alpha: f64,
    ) -> Self {
        AnnealedTarget {
            model,
            target,
            source,
            gamma,
            alpha,
        }
    }

    /// Prior only.
    pub fn prior(model: &'a M) -> Self {
        AnnealedTarget::new(model, &[], &[], 0.0, 0.0)
    }
}

impl<M: Model> LogTarget for AnnealedTarget<'_, M> {
    fn evaluate(&self, _slot: usize, theta: &[f64]) -> Components {
        let log_prior = self.model.log_prior(theta);
        if log_prior == f64::NEG_INFINITY {
            return Components {
                log_prior,
                target_ll: f64::NEG_INFINITY,
                source_ll: f64::NEG_INFINITY,
            };
        }
        Components {
            log_prior,
            target_ll: if self.gamma > 0.0 {
                self.model.log_lik(self.target, theta)
            } else {
                f64::NAN
            },
            source_ll: if self.alpha > 0.0 {
                self.model.log_lik(self.source, theta)
            } else {
                f64::NAN
            },
        }
    }

    #[inline]
    fn log_density(&self, _slot: usize, c: &Components) -> f64 {
        let mut ld = c.log_prior;
        if self.gamma > 0.0 {
            ld += self.gamma * c.target_ll;
        }
        if self.alpha > 0.0 {
            ld += self.alpha * c.source_ll;
        }
        ld
    }
}
