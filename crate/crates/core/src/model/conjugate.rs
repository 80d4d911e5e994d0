//! Conjugate Gaussian models with closed-form evidence, used to validate the
//! samplers.

use rand::Rng;
use rand_distr::StandardNormal;

use super::{format_real, normal_log_pdf, parse_real, Model, Observation, RegressionObservation};

/// Scalar observation `y`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScalarObservation {
    pub y: f64,
}

impl Observation for ScalarObservation {
    const COLUMNS: &'static [&'static str] = &["y"];

    fn validate(&self) -> std::result::Result<(), String> {
        if self.y.is_finite() {
            Ok(())
        } else {
            Err("non-finite y".into())
        }
    }

    fn to_fields(&self) -> Vec<String> {
        vec![format_real(self.y)]
    }

    fn from_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        match fields {
            [y] => Ok(ScalarObservation { y: parse_real(y)? }),
            _ => Err(format!("expected 1 field, got {}", fields.len())),
        }
    }
}

/// `y ~ N(mu, sd^2)` with known `sd` and prior `mu ~ N(prior_mean, prior_sd^2)`.
#[derive(Debug, Clone, Copy)]
pub struct NormalMean {
    pub sd: f64,
    pub prior_mean: f64,
    pub prior_sd: f64,
}

impl Model for NormalMean {
    type Obs = ScalarObservation;

    fn name(&self) -> &'static str {
        "normal-mean"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["mu"]
    }

    fn log_prior(&self, theta: &[f64]) -> f64 {
        normal_log_pdf(theta[0], self.prior_mean, self.prior_sd)
    }

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        vec![self.prior_mean + self.prior_sd * rng.sample::<f64, _>(StandardNormal)]
    }

    fn log_lik_point(&self, obs: &ScalarObservation, theta: &[f64]) -> f64 {
        normal_log_pdf(obs.y, theta[0], self.sd)
    }

    fn constrain(&self, theta: &[f64]) -> Vec<f64> {
        theta.to_vec()
    }

    fn unconstrain(&self, natural: &[f64]) -> Vec<f64> {
        natural.to_vec()
    }
}

/// `y = b0 + b1 x + N(0, sd^2)` with known `sd` and prior `b ~ N(0, prior_sd^2 I)`.
#[derive(Debug, Clone, Copy)]
pub struct KnownSigmaRegression {
    pub sd: f64,
    pub prior_sd: f64,
}

impl Model for KnownSigmaRegression {
    type Obs = RegressionObservation;

    fn name(&self) -> &'static str {
        "known-sigma-regression"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["beta0", "beta1"]
    }

    fn log_prior(&self, theta: &[f64]) -> f64 {
        normal_log_pdf(theta[0], 0.0, self.prior_sd) + normal_log_pdf(theta[1], 0.0, self.prior_sd)
    }

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        (0..2)
            .map(|_| self.prior_sd * rng.sample::<f64, _>(StandardNormal))
            .collect()
    }

    fn log_lik_point(&self, obs: &RegressionObservation, theta: &[f64]) -> f64 {
        normal_log_pdf(obs.y, theta[0] + theta[1] * obs.x, self.sd)
    }

    fn constrain(&self, theta: &[f64]) -> Vec<f64> {
        theta.to_vec()
    }

    fn unconstrain(&self, natural: &[f64]) -> Vec<f64> {
        natural.to_vec()
    }
}
