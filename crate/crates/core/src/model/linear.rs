use rand::Rng;
use rand_distr::StandardNormal;

use super::{format_real, normal_log_pdf, parse_real, Dataset, Model, Observation, Role};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegressionObservation {
    pub y: f64,
    pub x: f64,
}

impl Observation for RegressionObservation {
    const COLUMNS: &'static [&'static str] = &["y", "x"];

    fn validate(&self) -> std::result::Result<(), String> {
        if self.y.is_finite() && self.x.is_finite() {
            Ok(())
        } else {
            Err("non-finite y or x".into())
        }
    }

    fn to_fields(&self) -> Vec<String> {
        vec![format_real(self.y), format_real(self.x)]
    }

    fn from_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        match fields {
            [y, x] => Ok(RegressionObservation {
                y: parse_real(y)?,
                x: parse_real(x)?,
            }),
            _ => Err(format!("expected 2 fields, got {}", fields.len())),
        }
    }
}

/// `y = b0 + b1 x + N(0, sigma^2)` with parameters `(b0, b1, log sigma)`.
///
/// Prior: `b0, b1 ~ N(0, 10^2)`, `log sigma ~ N(0, 1.5^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct LinearRegression;

impl LinearRegression {
    pub const COEF_PRIOR_SD: f64 = 10.0;
    pub const LOG_SIGMA_PRIOR_SD: f64 = 1.5;
}

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

impl Model for LinearRegression {
    type Obs = RegressionObservation;

    fn name(&self) -> &'static str {
        "linear"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["beta0", "beta1", "sigma"]
    }

    fn log_prior(&self, theta: &[f64]) -> f64 {
        normal_log_pdf(theta[0], 0.0, Self::COEF_PRIOR_SD)
            + normal_log_pdf(theta[1], 0.0, Self::COEF_PRIOR_SD)
            + normal_log_pdf(theta[2], 0.0, Self::LOG_SIGMA_PRIOR_SD)
    }

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let z: [f64; 3] = [
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
            rng.sample(StandardNormal),
        ];
        vec![
            Self::COEF_PRIOR_SD * z[0],
            Self::COEF_PRIOR_SD * z[1],
            Self::LOG_SIGMA_PRIOR_SD * z[2],
        ]
    }

    #[inline]
    fn log_lik_point(&self, obs: &RegressionObservation, theta: &[f64]) -> f64 {
        let inv_sd = (-theta[2]).exp();
        let r = (obs.y - theta[0] - theta[1] * obs.x) * inv_sd;
        -HALF_LN_2PI - theta[2] - 0.5 * r * r
    }

    fn log_lik(&self, data: &[RegressionObservation], theta: &[f64]) -> f64 {
        let inv_sd = (-theta[2]).exp();
        let (b0, b1) = (theta[0], theta[1]);
        let ss: f64 = data
            .iter()
            .map(|o| {
                let r = o.y - b0 - b1 * o.x;
                r * r
            })
            .sum();
        -(data.len() as f64) * (HALF_LN_2PI + theta[2]) - 0.5 * ss * inv_sd * inv_sd
    }

    fn constrain(&self, theta: &[f64]) -> Vec<f64> {
        vec![theta[0], theta[1], theta[2].exp()]
    }

    fn unconstrain(&self, natural: &[f64]) -> Vec<f64> {
        vec![natural[0], natural[1], natural[2].ln()]
    }
}

/// `n` draws with `x ~ N(0, 1)` and `y = b0 + b1 x + N(0, sigma^2)`.
/// `theta` is on the natural scale `(b0, b1, sigma)`.
pub fn generate_linear<R: Rng + ?Sized>(
    n: usize,
    theta: &[f64],
    role: Role,
    rng: &mut R,
) -> Result<Dataset<RegressionObservation>> {
    if n == 0 || theta.len() != 3 || !(theta[2] > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "linear generator needs n >= 1 and sigma > 0 (n = {n}, theta = {theta:?})"
        )));
    }
    let obs = (0..n)
        .map(|_| {
            let x: f64 = rng.sample(StandardNormal);
            let e: f64 = rng.sample(StandardNormal);
            RegressionObservation {
                y: theta[0] + theta[1] * x + theta[2] * e,
                x,
            }
        })
        .collect();
    Dataset::new(role, obs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Stream;
    use approx::assert_abs_diff_eq;

    #[test]
    fn pointwise_examples() {
        let m = LinearRegression;
        let o = |y, x| RegressionObservation { y, x };
        assert_abs_diff_eq!(
            m.log_lik_point(&o(0.0, 0.0), &[0.0, 0.0, 0.0]),
            -0.918_938_533_2,
            epsilon = 1e-9
        );
        assert_abs_diff_eq!(
            m.log_lik_point(&o(8.0, 1.0), &[5.0, 3.0, 2f64.ln()]),
            -0.5 * (2.0 * std::f64::consts::PI * 4.0).ln(),
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(
            m.log_lik_point(&o(2.0, 0.0), &[0.0, 0.0, 2f64.ln()]),
            -0.5 * (8.0 * std::f64::consts::PI).ln() - 0.5,
            epsilon = 1e-12
        );
    }

    #[test]
    fn total_matches_pointwise_sum() {
        let mut rng = Stream::root(4).rng();
        let d = generate_linear(50, &[1.0, -2.0, 0.7], Role::Target, &mut rng).unwrap();
        let theta = [0.3, -1.5, -0.2];
        let m = LinearRegression;
        let pointwise: f64 = d
            .observations()
            .iter()
            .map(|o| m.log_lik_point(o, &theta))
            .sum();
        assert_abs_diff_eq!(
            m.log_lik(d.observations(), &theta),
            pointwise,
            epsilon = 1e-9
        );
    }

    #[test]
    fn noiseless_limit() {
        let mut rng = Stream::root(1).rng();
        let d = generate_linear(100, &[5.0, 3.0, 1e-12], Role::Target, &mut rng).unwrap();
        for o in d.observations() {
            assert!((o.y - 5.0 - 3.0 * o.x).abs() < 1e-10);
        }
    }

    #[test]
    fn large_sample_moments() {
        let mut rng = Stream::root(2).rng();
        let d = generate_linear(100_000, &[5.0, 3.0, 2.0], Role::Target, &mut rng).unwrap();
        let n = d.len() as f64;
        let obs = d.observations();
        let my = obs.iter().map(|o| o.y).sum::<f64>() / n;
        let mx = obs.iter().map(|o| o.x).sum::<f64>() / n;
        let sxy: f64 = obs.iter().map(|o| (o.x - mx) * (o.y - my)).sum();
        let sxx: f64 = obs.iter().map(|o| (o.x - mx).powi(2)).sum();
        assert!((my - 5.0).abs() < 0.05, "{my}");
        assert!((sxy / sxx - 3.0).abs() < 0.05);
    }

    #[test]
    fn generator_is_deterministic() {
        let a = generate_linear(
            20,
            &[5.0, 3.0, 2.0],
            Role::Source,
            &mut Stream::root(9).rng(),
        )
        .unwrap();
        let b = generate_linear(
            20,
            &[5.0, 3.0, 2.0],
            Role::Source,
            &mut Stream::root(9).rng(),
        )
        .unwrap();
        assert_eq!(a, b);
        assert!(generate_linear(
            0,
            &[5.0, 3.0, 2.0],
            Role::Source,
            &mut Stream::root(9).rng()
        )
        .is_err());
        assert!(generate_linear(
            5,
            &[5.0, 3.0, 0.0],
            Role::Source,
            &mut Stream::root(9).rng()
        )
        .is_err());
    }

    #[test]
    fn constrain_roundtrip() {
        let m = LinearRegression;
        let nat = [5.0, 3.0, 2.0];
        let back = m.constrain(&m.unconstrain(&nat));
        for (a, b) in nat.iter().zip(&back) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }
}
