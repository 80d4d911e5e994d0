#![allow(dead_code)]

use std::f64::consts::PI;

use tsmc_core::model::{RegressionObservation, ScalarObservation};

/// `log ∫ exp(-a x^2 / 2 + b x + c) dx`.
pub fn log_gauss_integral(a: f64, b: f64, c: f64) -> f64 {
    c + b * b / (2.0 * a) + 0.5 * (2.0 * PI / a).ln()
}

/// Closed-form `log ∫ N(y_T | mu)^gamma N(y_S | mu)^alpha N(mu | m0, s0^2) dmu`
/// for a normal mean with known `sd`.
pub fn normal_mean_log_evidence(
    target: &[f64],
    gamma: f64,
    source: &[f64],
    alpha: f64,
    sd: f64,
    m0: f64,
    s0: f64,
) -> f64 {
    let v = sd * sd;
    let (nt, st, qt) = moments(target);
    let (ns, ss, qs) = moments(source);
    let a = 1.0 / (s0 * s0) + (gamma * nt + alpha * ns) / v;
    let b = m0 / (s0 * s0) + (gamma * st + alpha * ss) / v;
    let c = -m0 * m0 / (2.0 * s0 * s0)
        - (s0 * (2.0 * PI).sqrt()).ln()
        - (gamma * nt + alpha * ns) * 0.5 * (2.0 * PI * v).ln()
        - (gamma * qt + alpha * qs) / (2.0 * v);
    log_gauss_integral(a, b, c)
}

fn moments(y: &[f64]) -> (f64, f64, f64) {
    (
        y.len() as f64,
        y.iter().sum(),
        y.iter().map(|v| v * v).sum(),
    )
}

pub fn scalars(y: &[f64]) -> Vec<ScalarObservation> {
    y.iter().map(|&y| ScalarObservation { y }).collect()
}

/// Posterior `N(mean, cov)` of `(b0, b1)` under `b ~ N(0, s0^2 I)` and known `sd`.
pub fn regression_posterior(
    data: &[RegressionObservation],
    sd: f64,
    s0: f64,
) -> ([f64; 2], [[f64; 2]; 2]) {
    let v = sd * sd;
    let mut p = [[1.0 / (s0 * s0), 0.0], [0.0, 1.0 / (s0 * s0)]];
    let mut r = [0.0; 2];
    for o in data {
        let x = [1.0, o.x];
        for i in 0..2 {
            r[i] += x[i] * o.y / v;
            for j in 0..2 {
                p[i][j] += x[i] * x[j] / v;
            }
        }
    }
    let det = p[0][0] * p[1][1] - p[0][1] * p[1][0];
    let cov = [
        [p[1][1] / det, -p[0][1] / det],
        [-p[1][0] / det, p[0][0] / det],
    ];
    let mean = [
        cov[0][0] * r[0] + cov[0][1] * r[1],
        cov[1][0] * r[0] + cov[1][1] * r[1],
    ];
    (mean, cov)
}

/// Exact `log p(y | x, data)` under the conjugate regression posterior.
pub fn regression_predictive(
    obs: &RegressionObservation,
    data: &[RegressionObservation],
    sd: f64,
    s0: f64,
) -> f64 {
    let (m, c) = regression_posterior(data, sd, s0);
    let x = [1.0, obs.x];
    let mu = m[0] + m[1] * obs.x;
    let var = sd * sd
        + (0..2)
            .map(|i| (0..2).map(|j| x[i] * c[i][j] * x[j]).sum::<f64>())
            .sum::<f64>();
    -0.5 * (2.0 * PI * var).ln() - (obs.y - mu).powi(2) / (2.0 * var)
}
