use rayon::prelude::*;

use crate::model::Model;
use crate::stats::{log_sum_exp, ParticleSystem};
use crate::Result;

/// How the posterior average enters the in-sample predictive score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ClppdMode {
    /// `sum_i log E[p(y_i | theta)]`.
    #[default]
    LogOfMean,
    /// `sum_i E[log p(y_i | theta)]`.
    MeanOfLog,
}

/// Pointwise log-likelihoods, one row per particle.
#[derive(Debug, Clone)]
pub struct PointwiseLogLik {
    pub points: usize,
    pub values: Vec<f64>,
}

impl PointwiseLogLik {
    #[inline]
    pub fn particle(&self, j: usize) -> &[f64] {
        &self.values[j * self.points..(j + 1) * self.points]
    }

    #[inline]
    pub fn get(&self, j: usize, i: usize) -> f64 {
        self.values[j * self.points + i]
    }

    pub fn particles(&self) -> usize {
        self.values.len() / self.points
    }

    /// Column `i` (one value per particle).
    pub fn point(&self, i: usize) -> Vec<f64> {
        (0..self.particles()).map(|j| self.get(j, i)).collect()
    }
}

pub fn pointwise_log_lik<M: Model>(
    model: &M,
    data: &[M::Obs],
    posterior: &ParticleSystem,
) -> PointwiseLogLik {
    let n = data.len();
    let mut values = vec![0.0; n * posterior.len()];
    values
        .par_chunks_mut(n.max(1))
        .enumerate()
        .for_each(|(j, out)| model.log_lik_pointwise(data, posterior.row(j), out));
    PointwiseLogLik { points: n, values }
}

/// In-sample log pointwise predictive density of `data` under a (possibly
/// weighted) posterior. A point with zero likelihood everywhere gives `-inf`.
pub fn clppd<M: Model>(
    model: &M,
    data: &[M::Obs],
    posterior: &ParticleSystem,
    mode: ClppdMode,
) -> Result<f64> {
    let log_w = posterior.log_weights().normalized()?;
    let ll = pointwise_log_lik(model, data, posterior);
    let mut total = 0.0;
    let mut buf = vec![0.0; posterior.len()];
    for i in 0..data.len() {
        match mode {
            ClppdMode::LogOfMean => {
                for (j, b) in buf.iter_mut().enumerate() {
                    *b = log_w.values()[j] + ll.get(j, i);
                }
                total += match log_sum_exp(&buf) {
                    Ok(v) => v,
                    Err(_) => {
                        log::warn!("target point {i} has zero likelihood under every particle");
                        f64::NEG_INFINITY
                    }
                };
            }
            ClppdMode::MeanOfLog => {
                total += (0..posterior.len())
                    .map(|j| log_w.values()[j].exp() * ll.get(j, i))
                    .sum::<f64>();
            }
        }
    }
    Ok(total)
}
