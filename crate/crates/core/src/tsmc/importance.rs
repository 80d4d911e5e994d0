use super::trace::TsmcTrace;
use crate::stats::{ess, log_sum_exp, LogWeights, ParticleSystem};
use crate::{Error, Result};

/// Weighted chain-1 particles and both log-constants at an arbitrary `alpha`.
#[derive(Debug, Clone)]
pub struct ImportanceUpdate {
    pub alpha: f64,
    /// Rung the particles come from (largest stored alpha not above `alpha`).
    pub rung: usize,
    /// Normalised chain-1 log-weights.
    pub log_weights: Vec<f64>,
    /// `log C_S(alpha)`.
    pub log_c0: f64,
    /// `log C_{T,S}(alpha)`.
    pub log_c1: f64,
}

impl ImportanceUpdate {
    /// `log C_T(alpha) = log C_{T,S}(alpha) - log C_S(alpha)`.
    pub fn log_ct(&self) -> f64 {
        self.log_c1 - self.log_c0
    }

    pub fn weights(&self) -> Vec<f64> {
        self.log_weights.iter().map(|w| w.exp()).collect()
    }

    pub fn ess(&self) -> Result<f64> {
        ess(&self.weights())
    }

    pub fn posterior(&self, trace: &TsmcTrace) -> Result<ParticleSystem> {
        ParticleSystem::new(
            trace.dim,
            trace.rungs[self.rung].chain1.values.clone(),
            LogWeights::new(self.log_weights.clone()),
        )
    }
}

fn tempered(source_ll: &[f64], delta: f64) -> Vec<f64> {
    source_ll
        .iter()
        .map(|&l| {
            if delta == 0.0 {
                0.0
            } else {
                let v = delta * l;
                if v.is_nan() {
                    f64::NEG_INFINITY
                } else {
                    v
                }
            }
        })
        .collect()
}

/// Index of the largest stored alpha not above `alpha`.
pub(crate) fn rung_below(trace: &TsmcTrace, alpha: f64) -> usize {
    trace
        .rungs
        .partition_point(|r| r.alpha <= alpha)
        .saturating_sub(1)
}

/// One importance step from the nearest stored rung below `alpha`: particles
/// at `alpha_h` are reweighted by `p(y_S | theta)^(alpha - alpha_h)`.
pub fn is_update(trace: &TsmcTrace, alpha: f64) -> Result<ImportanceUpdate> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::InvalidArgument(format!(
            "alpha {alpha} outside [0, 1]"
        )));
    }
    let h = rung_below(trace, alpha);
    let rung = &trace.rungs[h];
    let delta = alpha - rung.alpha;
    let log_n = (rung.chain1.len() as f64).ln();

    let incr0 = tempered(&rung.chain0.source_ll, delta);
    let log_c0 = rung.log_c0 + log_sum_exp(&incr0)? - log_n;

    let mut incr1 = tempered(&rung.chain1.source_ll, delta);
    let lse1 = log_sum_exp(&incr1)?;
    let log_c1 = rung.log_c1 + lse1 - log_n;
    for v in &mut incr1 {
        *v -= lse1;
    }
    Ok(ImportanceUpdate {
        alpha,
        rung: h,
        log_weights: incr1,
        log_c0,
        log_c1,
    })
}
