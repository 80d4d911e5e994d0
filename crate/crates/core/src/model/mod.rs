//! Model abstraction and the two shipped models.
//!
//! A [`Model`] works on an unconstrained parameter vector: the prior density
//! is expressed there (Jacobians included), the random-walk kernels move
//! there, and [`Model::constrain`] maps back to the natural scale used for
//! reporting.

mod conjugate;
mod cure;
mod io;
mod linear;

use rand::Rng;
use serde::{Deserialize, Serialize};

pub use conjugate::{KnownSigmaRegression, NormalMean, ScalarObservation};
pub use cure::{
    generate_cure, weibull_cdf, weibull_inverse_cdf, weibull_log_pdf, weibull_min_draw,
    SurvivalObservation, WeibullCure, CENSOR_TIME, SEX_RATE, TREATMENT_RATE,
};
pub use io::{read_dataset, write_dataset, write_dataset_to};
pub use linear::{generate_linear, LinearRegression, RegressionObservation};

use crate::{Error, Result};

/// One observation record with a fixed CSV column layout.
pub trait Observation: Clone + Send + Sync + 'static {
    /// CSV header, in column order.
    const COLUMNS: &'static [&'static str];

    fn validate(&self) -> std::result::Result<(), String>;
    fn to_fields(&self) -> Vec<String>;
    fn from_fields(fields: &[&str]) -> std::result::Result<Self, String>;
}

/// Prior, pointwise likelihood and constraint map for a parametric model.
pub trait Model: Send + Sync {
    type Obs: Observation;

    /// Short identifier recorded in trace files.
    fn name(&self) -> &'static str;

    /// Natural-scale parameter names.
    fn param_names(&self) -> &'static [&'static str];

    fn dim(&self) -> usize {
        self.param_names().len()
    }

    /// Log prior density on the unconstrained space.
    fn log_prior(&self, theta: &[f64]) -> f64;

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64>;

    fn log_lik_point(&self, obs: &Self::Obs, theta: &[f64]) -> f64;

    /// Total log-likelihood; observations are independent.
    fn log_lik(&self, data: &[Self::Obs], theta: &[f64]) -> f64 {
        data.iter().map(|o| self.log_lik_point(o, theta)).sum()
    }

    /// Pointwise log-likelihoods written into `out`.
    fn log_lik_pointwise(&self, data: &[Self::Obs], theta: &[f64], out: &mut [f64]) {
        for (o, slot) in data.iter().zip(out.iter_mut()) {
            *slot = self.log_lik_point(o, theta);
        }
    }

    fn constrain(&self, theta: &[f64]) -> Vec<f64>;

    fn unconstrain(&self, natural: &[f64]) -> Vec<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Target,
    Source,
}

impl std::fmt::Display for Role {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Role::Target => "target",
            Role::Source => "source",
        })
    }
}

impl std::str::FromStr for Role {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "target" => Ok(Role::Target),
            "source" => Ok(Role::Source),
            other => Err(Error::InvalidArgument(format!(
                "unknown dataset role `{other}`"
            ))),
        }
    }
}

/// Non-empty, validated set of observations of one kind.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset<O> {
    role: Role,
    observations: Vec<O>,
}

impl<O: Observation> Dataset<O> {
    pub fn new(role: Role, observations: Vec<O>) -> Result<Self> {
        if observations.is_empty() {
            return Err(Error::InvalidArgument(format!("{role} dataset is empty")));
        }
        for (row, o) in observations.iter().enumerate() {
            o.validate()
                .map_err(|reason| Error::InvalidObservation { row, reason })?;
        }
        Ok(Dataset { role, observations })
    }

    pub fn role(&self) -> Role {
        self.role
    }

    pub fn observations(&self) -> &[O] {
        &self.observations
    }

    pub fn len(&self) -> usize {
        self.observations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.observations.is_empty()
    }

    /// Concatenation, keeping this dataset's role.
    pub fn concat(&self, other: &Dataset<O>) -> Dataset<O> {
        let mut observations = self.observations.clone();
        observations.extend_from_slice(&other.observations);
        Dataset {
            role: self.role,
            observations,
        }
    }

    pub fn without(&self, index: usize) -> Result<Dataset<O>> {
        let mut observations = self.observations.clone();
        observations.remove(index);
        Dataset::new(self.role, observations)
    }
}

/// Standard normal log density at `x` with mean `mu` and sd `sd`.
#[inline]
pub(crate) fn normal_log_pdf(x: f64, mu: f64, sd: f64) -> f64 {
    let z = (x - mu) / sd;
    -0.5 * z * z - sd.ln() - 0.5 * (2.0 * std::f64::consts::PI).ln()
}

pub fn format_real(x: f64) -> String {
    // 17 significant digits round-trip every f64
    format!("{x:.16e}")
}

pub fn parse_real(s: &str) -> std::result::Result<f64, String> {
    s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}"))
}
