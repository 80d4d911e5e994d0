use rand::Rng;
use rand_distr::{Bernoulli, Distribution, Poisson, StandardNormal};

use super::{format_real, normal_log_pdf, parse_real, Dataset, Model, Observation, Role};
use crate::{Error, Result};

/// Right-censoring time (years).
pub const CENSOR_TIME: f64 = 5.5;
/// P(treatment = 1) for generated covariates.
pub const TREATMENT_RATE: f64 = 0.511;
/// P(sex = 1) for generated covariates.
pub const SEX_RATE: f64 = 0.397;
/// Standard deviation of the raw age covariate before standardisation.
const AGE_SD: f64 = 0.6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurvivalObservation {
    /// Relapse-free time in years.
    y: f64,
    /// 1 if a relapse was observed, 0 if censored.
    nu: u8,
    /// Treatment indicator.
    x1: u8,
    /// Sex indicator.
    x2: u8,
    /// Standardised age.
    x3: f64,
    ln_y: f64,
}

impl SurvivalObservation {
    pub fn new(y: f64, nu: u8, x1: u8, x2: u8, x3: f64) -> Self {
        SurvivalObservation {
            y,
            nu,
            x1,
            x2,
            x3,
            ln_y: y.ln(),
        }
    }

    pub fn y(&self) -> f64 {
        self.y
    }

    pub fn nu(&self) -> u8 {
        self.nu
    }

    pub fn x1(&self) -> u8 {
        self.x1
    }

    pub fn x2(&self) -> u8 {
        self.x2
    }

    pub fn x3(&self) -> f64 {
        self.x3
    }

    /// Design row `(1, x1, x2, x3, x2 * x3)`.
    #[inline]
    pub fn design(&self) -> [f64; 5] {
        let x2 = f64::from(self.x2);
        [1.0, f64::from(self.x1), x2, self.x3, x2 * self.x3]
    }
}

fn parse_indicator(s: &str) -> std::result::Result<u8, String> {
    match s.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("indicator must be 0 or 1, got `{other}`")),
    }
}

impl Observation for SurvivalObservation {
    const COLUMNS: &'static [&'static str] = &["y", "nu", "x1", "x2", "x3"];

    fn validate(&self) -> std::result::Result<(), String> {
        if !(self.y > 0.0) || !self.y.is_finite() {
            return Err(format!(
                "survival time must be positive and finite, got {}",
                self.y
            ));
        }
        if self.nu > 1 || self.x1 > 1 || self.x2 > 1 {
            return Err("indicators must be 0 or 1".into());
        }
        if !self.x3.is_finite() {
            return Err("non-finite age covariate".into());
        }
        Ok(())
    }

    fn to_fields(&self) -> Vec<String> {
        vec![
            format_real(self.y),
            self.nu.to_string(),
            self.x1.to_string(),
            self.x2.to_string(),
            format_real(self.x3),
        ]
    }

    fn from_fields(fields: &[&str]) -> std::result::Result<Self, String> {
        match fields {
            [y, nu, x1, x2, x3] => Ok(SurvivalObservation::new(
                parse_real(y)?,
                parse_indicator(nu)?,
                parse_indicator(x1)?,
                parse_indicator(x2)?,
                parse_real(x3)?,
            )),
            _ => Err(format!("expected 5 fields, got {}", fields.len())),
        }
    }
}

/// Weibull log density `log k + (k-1) log y + lambda - y^k e^lambda`.
pub fn weibull_log_pdf(y: f64, shape: f64, log_rate: f64) -> f64 {
    shape.ln() + (shape - 1.0) * y.ln() + log_rate - y.powf(shape) * log_rate.exp()
}

/// Weibull CDF `1 - exp(-y^k e^lambda)`.
pub fn weibull_cdf(y: f64, shape: f64, log_rate: f64) -> f64 {
    -(-(y.powf(shape) * log_rate.exp())).exp_m1()
}

/// Quantile function of [`weibull_cdf`].
pub fn weibull_inverse_cdf(p: f64, shape: f64, log_rate: f64) -> f64 {
    (-(-p).ln_1p() * (-log_rate).exp()).powf(1.0 / shape)
}

/// Minimum of `count` independent Weibull draws.
///
/// The minimum of `count` draws with rate `e^lambda` is itself Weibull with
/// rate `count * e^lambda`, so a single inverse-CDF draw suffices.
pub fn weibull_min_draw<R: Rng + ?Sized>(
    count: u64,
    shape: f64,
    log_rate: f64,
    rng: &mut R,
) -> f64 {
    debug_assert!(count >= 1);
    let u = 1.0 - rng.random::<f64>();
    (-u.ln() * (-log_rate).exp() / count as f64).powf(1.0 / shape)
}

/// Promotion-time Weibull cure model with parameters
/// `(b0, b1, b2, b3, b4, log k, lambda)` and design `(1, x1, x2, x3, x2 x3)`.
///
/// Pointwise log-likelihood `nu (X b + log f(y)) - exp(X b) F(y)`.
///
/// Prior: `b_j ~ N(0, 10^2)`, `log k ~ N(0, 1)`, `lambda ~ N(0, 10^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct WeibullCure;

impl WeibullCure {
    pub const COEF_PRIOR_SD: f64 = 10.0;
    pub const LOG_SHAPE_PRIOR_SD: f64 = 1.0;
    pub const LOG_RATE_PRIOR_SD: f64 = 10.0;

    /// Per-parameter pieces shared by every observation.
    #[inline]
    fn shared(theta: &[f64]) -> Shared {
        let shape = theta[5].exp();
        Shared {
            shape,
            censor_log_cdf: log_cdf(shape * CENSOR_TIME.ln() + theta[6]),
        }
    }

    #[inline]
    fn point(obs: &SurvivalObservation, theta: &[f64], sh: &Shared) -> f64 {
        let x = obs.design();
        let eta =
            x[0] * theta[0] + x[1] * theta[1] + x[2] * theta[2] + x[3] * theta[3] + x[4] * theta[4];
        if obs.nu == 0 && obs.y == CENSOR_TIME {
            return -(eta + sh.censor_log_cdf).exp();
        }
        let ln_y = obs.ln_y;
        let log_hazard = sh.shape * ln_y + theta[6];
        // exp(eta) F(y) in log space: F rounds to zero long before the
        // product becomes negligible when eta is large and lambda very negative
        let mut ll = -(eta + log_cdf(log_hazard)).exp();
        if obs.nu == 1 {
            ll += eta + theta[5] - ln_y + log_hazard - log_hazard.exp();
        }
        ll
    }
}

struct Shared {
    shape: f64,
    censor_log_cdf: f64,
}

/// `log(1 - exp(-H))` given `log H`.
#[inline]
fn log_cdf(log_hazard: f64) -> f64 {
    let h = log_hazard.exp();
    if log_hazard < -20.0 {
        log_hazard - 0.5 * h
    } else {
        (-(-h).exp_m1()).ln()
    }
}

impl Model for WeibullCure {
    type Obs = SurvivalObservation;

    fn name(&self) -> &'static str {
        "cure"
    }

    fn param_names(&self) -> &'static [&'static str] {
        &["beta0", "beta1", "beta2", "beta3", "beta4", "k", "lambda"]
    }

    fn log_prior(&self, theta: &[f64]) -> f64 {
        theta[..5]
            .iter()
            .map(|b| normal_log_pdf(*b, 0.0, Self::COEF_PRIOR_SD))
            .sum::<f64>()
            + normal_log_pdf(theta[5], 0.0, Self::LOG_SHAPE_PRIOR_SD)
            + normal_log_pdf(theta[6], 0.0, Self::LOG_RATE_PRIOR_SD)
    }

    fn sample_prior<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out: Vec<f64> = (0..5)
            .map(|_| Self::COEF_PRIOR_SD * rng.sample::<f64, _>(StandardNormal))
            .collect();
        out.push(Self::LOG_SHAPE_PRIOR_SD * rng.sample::<f64, _>(StandardNormal));
        out.push(Self::LOG_RATE_PRIOR_SD * rng.sample::<f64, _>(StandardNormal));
        out
    }

    fn log_lik_point(&self, obs: &SurvivalObservation, theta: &[f64]) -> f64 {
        Self::point(obs, theta, &Self::shared(theta))
    }

    fn log_lik(&self, data: &[SurvivalObservation], theta: &[f64]) -> f64 {
        let sh = Self::shared(theta);
        data.iter().map(|o| Self::point(o, theta, &sh)).sum()
    }

    fn log_lik_pointwise(&self, data: &[SurvivalObservation], theta: &[f64], out: &mut [f64]) {
        let sh = Self::shared(theta);
        for (o, slot) in data.iter().zip(out.iter_mut()) {
            *slot = Self::point(o, theta, &sh);
        }
    }

    fn constrain(&self, theta: &[f64]) -> Vec<f64> {
        let mut out = theta.to_vec();
        out[5] = theta[5].exp();
        out
    }

    fn unconstrain(&self, natural: &[f64]) -> Vec<f64> {
        let mut out = natural.to_vec();
        out[5] = natural[5].ln();
        out
    }
}

/// Simulates `n` subjects from the cure process at natural-scale
/// `theta = (b0..b4, k, lambda)`.
///
/// Covariates: `x1 ~ Ber(0.511)`, `x2 ~ Ber(0.397)`, `x3 = s / 0.6` with
/// `s ~ N(0, 0.6^2)`. The latent count `C ~ Poisson(exp(X b))`; `C = 0`
/// subjects are cured and recorded at the censor time with `nu = 0`,
/// otherwise the event time is the minimum of `C` Weibull draws, censored at
/// 5.5.
pub fn generate_cure<R: Rng + ?Sized>(
    n: usize,
    theta: &[f64],
    role: Role,
    rng: &mut R,
) -> Result<Dataset<SurvivalObservation>> {
    if n == 0 || theta.len() != 7 || !(theta[5] > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "cure generator needs n >= 1 and k > 0 (n = {n}, theta = {theta:?})"
        )));
    }
    let treat = Bernoulli::new(TREATMENT_RATE).expect("valid rate");
    let sex = Bernoulli::new(SEX_RATE).expect("valid rate");
    let (shape, log_rate) = (theta[5], theta[6]);
    let mut obs = Vec::with_capacity(n);
    for _ in 0..n {
        let x1 = u8::from(treat.sample(rng));
        let x2 = u8::from(sex.sample(rng));
        let s = AGE_SD * rng.sample::<f64, _>(StandardNormal);
        let x3 = s / AGE_SD;
        let mut o = SurvivalObservation::new(CENSOR_TIME, 0, x1, x2, x3);
        let x = o.design();
        let eta: f64 = x.iter().zip(theta).map(|(a, b)| a * b).sum();
        let mean = eta.exp();
        let count = if mean > 0.0 && mean.is_finite() {
            Poisson::new(mean)
                .map_err(|e| Error::InvalidArgument(format!("poisson rate {mean}: {e}")))?
                .sample(rng) as u64
        } else if mean == 0.0 {
            0
        } else {
            return Err(Error::InvalidArgument(format!(
                "poisson rate {mean} is not finite"
            )));
        };
        if count > 0 {
            let raw = weibull_min_draw(count, shape, log_rate, rng);
            if raw <= CENSOR_TIME {
                o = SurvivalObservation::new(raw, 1, x1, x2, x3);
            }
        }
        obs.push(o);
    }
    Dataset::new(role, obs)
}
