use crate::stats::{log_sum_exp, LogWeights};
use crate::{Error, Result};

/// Bisection tolerance on the temperature axis.
pub const BISECTION_TOL: f64 = 1e-8;
pub const BISECTION_MAX_ITER: usize = 100;

#[inline]
fn shifted(log_w: f64, incr: f64, delta: f64) -> f64 {
    if delta == 0.0 {
        log_w
    } else {
        let v = log_w + delta * incr;
        if v.is_nan() {
            f64::NEG_INFINITY
        } else {
            v
        }
    }
}

/// ESS of the weights `W_i * exp(delta * incr_i)`, where `log_w` holds
/// normalised log-weights. Zero when every new weight vanishes.
pub fn ess_after_increment(log_w: &[f64], incr: &[f64], delta: f64) -> f64 {
    debug_assert_eq!(log_w.len(), incr.len());
    let max = log_w
        .iter()
        .zip(incr)
        .map(|(&w, &c)| shifted(w, c, delta))
        .fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return 0.0;
    }
    let (mut s1, mut s2) = (0.0, 0.0);
    for (&w, &c) in log_w.iter().zip(incr) {
        let e = (shifted(w, c, delta) - max).exp();
        s1 += e;
        s2 += e * e;
    }
    s1 * s1 / s2
}

/// Result of an ESS-driven temperature search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TemperatureChoice {
    pub value: f64,
    /// Even the smallest bisection step fell below the ESS target.
    pub pathological: bool,
}

/// Largest `tau` in `[lower, 1]` with `min_c ESS_c(tau) >= target_ess`, where
/// chain `c` is reweighted by `exp((tau - lower) * incr_c)`.
///
/// Each chain is a pair `(normalised log-weights, increments)`.
pub fn next_temperature_coupled(
    chains: &[(&[f64], &[f64])],
    lower: f64,
    target_ess: f64,
) -> Result<TemperatureChoice> {
    if !(0.0..1.0).contains(&lower) {
        return Err(Error::InvalidArgument(format!(
            "lower temperature {lower} outside [0, 1)"
        )));
    }
    for (_, incr) in chains {
        if !incr.iter().any(|v| v.is_finite()) {
            return Err(Error::DegenerateWeights(
                "no finite incremental log-likelihood".into(),
            ));
        }
    }
    let min_ess = |tau: f64| {
        chains
            .iter()
            .map(|(w, incr)| ess_after_increment(w, incr, tau - lower))
            .fold(f64::INFINITY, f64::min)
    };
    if min_ess(1.0) >= target_ess {
        return Ok(TemperatureChoice {
            value: 1.0,
            pathological: false,
        });
    }
    let (mut lo, mut hi) = (lower, 1.0);
    for _ in 0..BISECTION_MAX_ITER {
        if hi - lo <= BISECTION_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if min_ess(mid) >= target_ess {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if lo > lower {
        Ok(TemperatureChoice {
            value: lo,
            pathological: false,
        })
    } else {
        log::warn!("ESS falls below {target_ess} for every step above {lower}; advancing to {hi}");
        Ok(TemperatureChoice {
            value: hi,
            pathological: true,
        })
    }
}

/// Single-chain form of [`next_temperature_coupled`].
pub fn next_temperature(
    log_w: &[f64],
    incr: &[f64],
    lower: f64,
    target_ess: f64,
) -> Result<TemperatureChoice> {
    next_temperature_coupled(&[(log_w, incr)], lower, target_ess)
}

/// Adds `delta * incr` to normalised log-weights and the log of the weighted
/// mean increment to the running log-evidence. Returns the un-normalised new
/// weights and the updated evidence.
pub fn reweight_and_evidence(
    log_w: &LogWeights,
    incr: &[f64],
    delta: f64,
    running_log_evidence: f64,
) -> Result<(LogWeights, f64)> {
    if !(delta >= 0.0) {
        return Err(Error::InvalidArgument(format!(
            "negative temperature increment {delta}"
        )));
    }
    let normalized = log_w.normalized()?;
    let new: Vec<f64> = normalized
        .values()
        .iter()
        .zip(incr)
        .map(|(&w, &c)| shifted(w, c, delta))
        .collect();
    let step = log_sum_exp(&new)?;
    Ok((LogWeights::new(new), running_log_evidence + step))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn uniform(n: usize) -> Vec<f64> {
        vec![-(n as f64).ln(); n]
    }

    #[test]
    fn constant_increment_goes_straight_to_one() {
        let w = uniform(50);
        let incr = vec![-3.7; 50];
        let t = next_temperature(&w, &incr, 0.2, 25.0).unwrap();
        assert_eq!(t.value, 1.0);
        assert!(!t.pathological);
    }

    #[test]
    fn two_atom_split_matches_closed_form() {
        // weights (1,1,e^{-c tau},e^{-c tau}) have ESS 2 (1+x)^2 / (1+x^2), x = e^{-c tau};
        // ESS = 2.5 gives x^2 - 8x + 1 = 0, x = 4 - sqrt(15)
        let c = 40.0;
        let w = uniform(4);
        let incr = [0.0, 0.0, -c, -c];
        let t = next_temperature(&w, &incr, 0.0, 2.5).unwrap();
        let expected = -(4.0 - 15f64.sqrt()).ln() / c;
        assert_abs_diff_eq!(t.value, expected, epsilon = 1e-6);
        assert!((ess_after_increment(&w, &incr, t.value) - 2.5).abs() < 1e-6);
    }

    #[test]
    fn coupled_search_uses_the_harder_chain() {
        let w = uniform(4);
        let easy = [0.0, 0.0, -1.0, -1.0];
        let hard = [0.0, 0.0, -40.0, -40.0];
        let solo = next_temperature(&w, &hard, 0.0, 2.5).unwrap().value;
        let both = next_temperature_coupled(&[(&w, &easy), (&w, &hard)], 0.0, 2.5)
            .unwrap()
            .value;
        assert_eq!(solo, both);
    }

    #[test]
    fn selected_temperature_meets_target() {
        let n = 200;
        let w = uniform(n);
        let incr: Vec<f64> = (0..n).map(|i| -((i * i) as f64) / 50.0).collect();
        let t = next_temperature(&w, &incr, 0.1, 100.0).unwrap();
        assert!(t.value > 0.1 && t.value < 1.0);
        let ess = ess_after_increment(&w, &incr, t.value - 0.1);
        assert!((ess - 100.0).abs() <= 1.0, "ess {ess}");
    }

    #[test]
    fn pathological_collapse_is_flagged() {
        let w = uniform(4);
        let incr = [0.0, -1e12, -1e12, -1e12];
        let t = next_temperature(&w, &incr, 0.0, 2.0).unwrap();
        assert!(t.pathological);
        assert!(t.value > 0.0 && t.value < 1e-7);
    }

    #[test]
    fn null_and_constant_reweights() {
        let w = LogWeights::uniform(5);
        let incr = [1.0, -2.0, 0.5, 3.0, f64::NEG_INFINITY];
        let (nw, z) = reweight_and_evidence(&w, &incr, 0.0, 1.25).unwrap();
        assert_eq!(z, 1.25);
        for v in nw.values() {
            assert_abs_diff_eq!(*v, -(5f64).ln(), epsilon = 1e-15);
        }
        let (_, z) = reweight_and_evidence(&w, &[2.0; 5], 0.3, 0.0).unwrap();
        assert_abs_diff_eq!(z, 0.6, epsilon = 1e-12);
    }

    #[test]
    fn vanishing_weights_are_an_error() {
        let w = LogWeights::uniform(3);
        let incr = [f64::NEG_INFINITY; 3];
        assert!(matches!(
            reweight_and_evidence(&w, &incr, 0.5, 0.0),
            Err(Error::DegenerateWeights(_))
        ));
        assert!(reweight_and_evidence(&w, &[0.0; 3], -0.1, 0.0).is_err());
    }
}
