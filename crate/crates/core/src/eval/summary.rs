use crate::model::Model;
use crate::stats::{hpd_region, ParticleSystem};
use crate::{Error, Result};

/// Credible level of the coverage check.
pub const COVERAGE_LEVEL: f64 = 0.9;

fn non_empty(samples: &[f64]) -> Result<()> {
    if samples.is_empty() {
        Err(Error::InsufficientSamples { needed: 1, got: 0 })
    } else {
        Ok(())
    }
}

pub fn mean(samples: &[f64]) -> Result<f64> {
    non_empty(samples)?;
    Ok(samples.iter().sum::<f64>() / samples.len() as f64)
}

/// `|mean - theta_star|`.
pub fn bias(samples: &[f64], theta_star: f64) -> Result<f64> {
    Ok((mean(samples)? - theta_star).abs())
}

/// Mean squared deviation from `theta_star`.
pub fn mse(samples: &[f64], theta_star: f64) -> Result<f64> {
    non_empty(samples)?;
    Ok(samples
        .iter()
        .map(|x| (x - theta_star).powi(2))
        .sum::<f64>()
        / samples.len() as f64)
}

/// Sample standard deviation with the `n - 1` denominator.
pub fn stdev(samples: &[f64]) -> Result<f64> {
    if samples.len() < 2 {
        return Err(Error::InsufficientSamples {
            needed: 2,
            got: samples.len(),
        });
    }
    let m = mean(samples)?;
    let ss: f64 = samples.iter().map(|x| (x - m).powi(2)).sum();
    Ok((ss / (samples.len() - 1) as f64).sqrt())
}

/// Whether `theta_star` lies in the KDE-based HPD region at `level`.
pub fn coverage_hit(samples: &[f64], theta_star: f64, level: f64) -> Result<bool> {
    Ok(hpd_region(samples, level)?
        .iter()
        .any(|r| r.contains(theta_star)))
}

/// Per-parameter bias, MSE, standard deviation and coverage indicator.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterMetrics {
    pub bias: Vec<f64>,
    pub mse: Vec<f64>,
    pub stdev: Vec<f64>,
    pub coverage: Vec<f64>,
}

/// Metrics of an equally weighted posterior, on the natural scale.
pub fn parameter_metrics<M: Model>(
    model: &M,
    posterior: &ParticleSystem,
    truth: &[f64],
) -> Result<ParameterMetrics> {
    if !posterior.log_weights().is_uniform() {
        return Err(Error::Contract(
            "parameter metrics need an equally weighted posterior".into(),
        ));
    }
    if truth.len() != model.dim() {
        return Err(Error::InvalidArgument(
            "truth has the wrong dimension".into(),
        ));
    }
    let natural: Vec<Vec<f64>> = posterior.rows().map(|r| model.constrain(r)).collect();
    let mut out = ParameterMetrics {
        bias: Vec::new(),
        mse: Vec::new(),
        stdev: Vec::new(),
        coverage: Vec::new(),
    };
    for (j, &t) in truth.iter().enumerate() {
        let col: Vec<f64> = natural.iter().map(|r| r[j]).collect();
        out.bias.push(bias(&col, t)?);
        out.mse.push(mse(&col, t)?);
        out.stdev.push(stdev(&col)?);
        out.coverage
            .push(if coverage_hit(&col, t, COVERAGE_LEVEL)? {
                1.0
            } else {
                0.0
            });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use approx::assert_abs_diff_eq;
    use rand::Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn bias_examples() {
        assert_eq!(bias(&[1.0, 3.0], 2.0).unwrap(), 0.0);
        assert_eq!(bias(&[2.0, 2.0], 0.0).unwrap(), 2.0);
        assert_eq!(bias(&[0.0, 1.0, 2.0, 3.0], 1.0).unwrap(), 0.5);
        assert!(bias(&[], 1.0).is_err());
    }

    #[test]
    fn mse_examples() {
        assert_eq!(mse(&[1.0, 3.0], 2.0).unwrap(), 1.0);
        assert_eq!(mse(&[2.0], 2.0).unwrap(), 0.0);
        assert_eq!(mse(&[0.0, 4.0], 1.0).unwrap(), 5.0);
    }

    #[test]
    fn stdev_examples() {
        assert_abs_diff_eq!(stdev(&[1.0, 3.0]).unwrap(), 2f64.sqrt(), epsilon = 1e-12);
        assert_eq!(stdev(&[4.0; 3]).unwrap(), 0.0);
        assert_abs_diff_eq!(stdev(&[0.0, 1.0, 2.0]).unwrap(), 1.0, epsilon = 1e-12);
        assert!(stdev(&[1.0]).is_err());
    }

    #[test]
    fn coverage_examples() {
        let mut rng = Stream::root(9).rng();
        let s: Vec<f64> = (0..100_000).map(|_| rng.sample(StandardNormal)).collect();
        assert!(coverage_hit(&s, 0.0, 0.9).unwrap());
        assert!(!coverage_hit(&s, 5.0, 0.9).unwrap());
        let hits = [1.0, 1.0, 0.0, 1.0];
        assert_eq!(mean(&hits).unwrap(), 0.75);
    }
}
