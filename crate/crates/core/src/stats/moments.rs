use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use super::particles::ParticleSystem;
use crate::{Error, Result};

/// Diagonal jitter, relative to the mean diagonal entry.
pub const JITTER_SCALE: f64 = 1e-8;
/// Number of times the jitter is doubled before giving up.
pub const JITTER_DOUBLINGS: u32 = 6;

/// Lower-triangular factor `L` of a (jittered) covariance, `cov = L L^T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CholeskyFactor {
    dim: usize,
    lower: Vec<f64>,
    jitter: f64,
}

impl CholeskyFactor {
    /// Factorises `cov + jitter * I`, starting from `JITTER_SCALE * mean(diag)`
    /// and doubling on failure.
    pub fn with_jitter(cov: &DMatrix<f64>) -> Result<Self> {
        let dim = cov.nrows();
        if dim == 0 || cov.ncols() != dim {
            return Err(Error::InvalidArgument(
                "covariance must be square and non-empty".into(),
            ));
        }
        if cov.iter().any(|v| !v.is_finite()) {
            return Err(Error::CovarianceDegenerate { dim });
        }
        let mean_diag = cov.diagonal().mean();
        // an all-zero cloud still gets an absolute floor
        let mut jitter = if mean_diag > 0.0 {
            JITTER_SCALE * mean_diag
        } else {
            JITTER_SCALE
        };
        for _ in 0..=JITTER_DOUBLINGS {
            let mut m = cov.clone();
            for i in 0..dim {
                m[(i, i)] += jitter;
            }
            if let Some(chol) = m.cholesky() {
                let l = chol.l();
                let mut lower = vec![0.0; dim * dim];
                for i in 0..dim {
                    for j in 0..=i {
                        lower[i * dim + j] = l[(i, j)];
                    }
                }
                return Ok(CholeskyFactor { dim, lower, jitter });
            }
            jitter *= 2.0;
        }
        Err(Error::CovarianceDegenerate { dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Row-major lower-triangular entries.
    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    /// Writes `mean + L z` into `out`, with `z` drawn as standard normals.
    #[inline]
    pub fn sample_into<R: Rng + ?Sized>(
        &self,
        mean: &[f64],
        rng: &mut R,
        z: &mut [f64],
        out: &mut [f64],
    ) {
        let d = self.dim;
        for zi in z.iter_mut() {
            *zi = rng.sample(StandardNormal);
        }
        for i in 0..d {
            let row = &self.lower[i * d..i * d + i + 1];
            let mut acc = 0.0;
            for (lij, zj) in row.iter().zip(z.iter()) {
                acc += lij * zj;
            }
            out[i] = mean[i] + acc;
        }
    }
}

/// Weighted mean and covariance of a particle cloud.
#[derive(Debug, Clone)]
pub struct Covariance {
    pub mean: Vec<f64>,
    /// Unbiased weighted covariance, with the factorisation jitter added to the
    /// diagonal.
    pub matrix: DMatrix<f64>,
    pub factor: CholeskyFactor,
}

/// Weighted mean and unbiased weighted covariance
/// `sum w (x - mu)(x - mu)^T / (1 - sum w^2)`.
///
/// Requires ESS >= 2 so that the normaliser is at least 1/2.
pub fn weighted_mean_cov(system: &ParticleSystem) -> Result<Covariance> {
    let w = system.log_weights().weights()?;
    let sum_sq: f64 = w.iter().map(|v| v * v).sum();
    if 1.0 / sum_sq < 2.0 - 1e-9 {
        return Err(Error::Contract(format!(
            "weighted covariance needs ESS >= 2 (got {:.3})",
            1.0 / sum_sq
        )));
    }
    let d = system.dim();
    let mut mean = vec![0.0; d];
    for (row, wi) in system.rows().zip(&w) {
        for (m, x) in mean.iter_mut().zip(row) {
            *m += wi * x;
        }
    }
    let mut cov = DMatrix::<f64>::zeros(d, d);
    let mut dev = vec![0.0; d];
    for (row, wi) in system.rows().zip(&w) {
        for (k, (x, m)) in row.iter().zip(&mean).enumerate() {
            dev[k] = x - m;
        }
        for a in 0..d {
            for b in 0..=a {
                cov[(a, b)] += wi * dev[a] * dev[b];
            }
        }
    }
    let norm = 1.0 / (1.0 - sum_sq);
    for a in 0..d {
        for b in 0..=a {
            let v = cov[(a, b)] * norm;
            cov[(a, b)] = v;
            cov[(b, a)] = v;
        }
    }
    let factor = CholeskyFactor::with_jitter(&cov)?;
    for i in 0..d {
        cov[(i, i)] += factor.jitter();
    }
    Ok(Covariance {
        mean,
        matrix: cov,
        factor,
    })
}

/// One draw from `MVN(mean, cov)` via a jittered Cholesky factor.
pub fn mvn_sample<R: Rng + ?Sized>(
    mean: &[f64],
    cov: &DMatrix<f64>,
    rng: &mut R,
) -> Result<Vec<f64>> {
    let factor = CholeskyFactor::with_jitter(cov)?;
    if mean.len() != factor.dim() {
        return Err(Error::InvalidArgument(
            "mean and covariance dimensions differ".into(),
        ));
    }
    let mut z = vec![0.0; mean.len()];
    let mut out = vec![0.0; mean.len()];
    factor.sample_into(mean, rng, &mut z, &mut out);
    Ok(out)
}
