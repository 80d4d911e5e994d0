use rand_distr::{Beta, Distribution};
use rayon::prelude::*;

use super::importance::is_update;
use super::trace::TsmcTrace;
use crate::rng::Stream;
use crate::stats::{categorical_draw, log_sum_exp, stratified_resample, ParticleSystem};
use crate::{Error, Result};

/// `Beta(a, b)` prior on the transfer parameter.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl Default for BetaPrior {
    fn default() -> Self {
        BetaPrior { a: 1.0, b: 1.0 }
    }
}

/// Joint draws from the normalised power prior posterior.
#[derive(Debug, Clone)]
pub struct NppResult {
    /// Prior draws of alpha.
    pub prior_alphas: Vec<f64>,
    /// Normalised weights over `prior_alphas`, proportional to `C_T(alpha)`.
    pub alpha_weights: Vec<f64>,
    /// Resampled alpha for each joint draw.
    pub alphas: Vec<f64>,
    /// Matching parameter draws (unconstrained), equally weighted.
    pub particles: ParticleSystem,
}

impl NppResult {
    pub fn alpha_mean(&self) -> f64 {
        self.alphas.iter().sum::<f64>() / self.alphas.len() as f64
    }
}

/// Draws alpha from the prior, weights each draw by its estimated
/// `C_T(alpha)`, resamples, and pairs every resampled alpha with one
/// parameter draw from the importance-weighted particles at that alpha.
pub fn sample_npp(
    trace: &TsmcTrace,
    n_samples: usize,
    prior: BetaPrior,
    stream: Stream,
) -> Result<NppResult> {
    if n_samples < 2 {
        return Err(Error::InvalidArgument(
            "need at least 2 joint samples".into(),
        ));
    }
    let beta = Beta::new(prior.a, prior.b).map_err(|e| {
        Error::InvalidArgument(format!("alpha prior Beta({}, {}): {e}", prior.a, prior.b))
    })?;
    let mut rng = stream.named("alpha-prior").rng();
    let prior_alphas: Vec<f64> = (0..n_samples).map(|_| beta.sample(&mut rng)).collect();

    let log_ct: Vec<f64> = prior_alphas
        .par_iter()
        .map(|&a| is_update(trace, a).map(|u| u.log_ct()))
        .collect::<Result<_>>()?;
    let cleaned: Vec<f64> = log_ct
        .iter()
        .map(|v| if v.is_finite() { *v } else { f64::NEG_INFINITY })
        .collect();
    let lse = log_sum_exp(&cleaned)
        .map_err(|_| Error::DegenerateWeights("no finite C_T at any prior draw of alpha".into()))?;
    let alpha_weights: Vec<f64> = cleaned.iter().map(|v| (v - lse).exp()).collect();

    let picks = stratified_resample(
        &alpha_weights,
        n_samples,
        &mut stream.named("alpha-resample").rng(),
    );
    let alphas: Vec<f64> = picks.iter().map(|&i| prior_alphas[i]).collect();

    let dim = trace.dim;
    let rows: Vec<Vec<f64>> = alphas
        .par_iter()
        .enumerate()
        .map(|(j, &a)| {
            let u = is_update(trace, a)?;
            let k = categorical_draw(
                &u.weights(),
                &mut stream.named("theta").child(j as u64).rng(),
            );
            Ok(trace.rungs[u.rung].chain1.row(k, dim).to_vec())
        })
        .collect::<Result<_>>()?;
    Ok(NppResult {
        prior_alphas,
        alpha_weights,
        alphas,
        particles: ParticleSystem::from_rows(&rows)?,
    })
}
