use crate::{Error, Result};

/// Numerically stable `log(sum(exp(values)))`.
///
/// Fails when every entry is `-inf` (or the slice is empty): there is no mass
/// to normalise.
pub fn log_sum_exp(values: &[f64]) -> Result<f64> {
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY || max.is_nan() {
        return Err(Error::DegenerateWeights(format!(
            "log-sum-exp over {} entries with no finite mass",
            values.len()
        )));
    }
    if max == f64::INFINITY {
        return Ok(f64::INFINITY);
    }
    let sum: f64 = values.iter().map(|v| (v - max).exp()).sum();
    Ok(max + sum.ln())
}

/// Effective sample size `1 / sum(w^2)` of normalised weights.
pub fn ess(weights: &[f64]) -> Result<f64> {
    let total: f64 = weights.iter().sum();
    if weights.is_empty() || (total - 1.0).abs() > 1e-8 || weights.iter().any(|w| !(*w >= 0.0)) {
        return Err(Error::Contract(format!(
            "ess expects normalised weights (sum = {total})"
        )));
    }
    let sq: f64 = weights.iter().map(|w| w * w).sum();
    Ok(1.0 / sq)
}

/// Per-particle log-weights. Not necessarily normalised.
#[derive(Debug, Clone, PartialEq)]
pub struct LogWeights(Vec<f64>);

impl LogWeights {
    pub fn new(values: Vec<f64>) -> Self {
        LogWeights(values)
    }

    /// Equal weights `-log N`.
    pub fn uniform(n: usize) -> Self {
        LogWeights(vec![-(n as f64).ln(); n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Normalises in place so that `sum(exp(w)) = 1`; returns the log of the
    /// mass removed.
    pub fn normalize(&mut self) -> Result<f64> {
        let lse = log_sum_exp(&self.0)?;
        for v in &mut self.0 {
            *v -= lse;
        }
        Ok(lse)
    }

    pub fn normalized(&self) -> Result<LogWeights> {
        let mut out = self.clone();
        out.normalize()?;
        Ok(out)
    }

    /// Linear-scale normalised weights.
    pub fn weights(&self) -> Result<Vec<f64>> {
        let lse = log_sum_exp(&self.0)?;
        Ok(self.0.iter().map(|v| (v - lse).exp()).collect())
    }

    pub fn ess(&self) -> Result<f64> {
        ess(&self.weights()?)
    }

    pub fn is_uniform(&self) -> bool {
        self.0.windows(2).all(|w| w[0] == w[1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn lse_examples() {
        assert_abs_diff_eq!(
            log_sum_exp(&[0.0, 0.0]).unwrap(),
            2f64.ln(),
            epsilon = 1e-15
        );
        assert_eq!(log_sum_exp(&[-1000.0]).unwrap(), -1000.0);
        assert_abs_diff_eq!(
            log_sum_exp(&[1000.0, 1000.0]).unwrap(),
            1000.0 + 2f64.ln(),
            epsilon = 1e-12
        );
        assert!(matches!(
            log_sum_exp(&[f64::NEG_INFINITY, f64::NEG_INFINITY]),
            Err(Error::DegenerateWeights(_))
        ));
    }

    #[test]
    fn ess_examples() {
        assert_abs_diff_eq!(ess(&[0.01; 100]).unwrap(), 100.0, epsilon = 1e-9);
        let mut hot = vec![0.0; 100];
        hot[17] = 1.0;
        assert_eq!(ess(&hot).unwrap(), 1.0);
        assert_eq!(ess(&[0.5, 0.5, 0.0, 0.0]).unwrap(), 2.0);
        assert!(matches!(ess(&[0.5, 0.7]), Err(Error::Contract(_))));
    }

    #[test]
    fn uniform_log_weights_have_full_ess() {
        let w = LogWeights::uniform(64);
        assert!((w.ess().unwrap() - 64.0).abs() < 1e-9);
        assert!(w.is_uniform());
    }

    proptest! {
        #[test]
        fn normalisation_is_shift_invariant(
            raw in prop::collection::vec(-50.0f64..50.0, 2..40),
            c in -500.0f64..500.0,
        ) {
            let a = LogWeights::new(raw.clone()).weights().unwrap();
            let b = LogWeights::new(raw.iter().map(|v| v + c).collect()).weights().unwrap();
            let sum: f64 = a.iter().sum();
            prop_assert!((sum - 1.0).abs() < 1e-10);
            for (x, y) in a.iter().zip(&b) {
                prop_assert!(x.is_finite() && *x >= 0.0);
                prop_assert!((x - y).abs() < 1e-12);
            }
        }

        #[test]
        fn ess_is_permutation_invariant(
            raw in prop::collection::vec(-10.0f64..10.0, 2..40),
        ) {
            let w = LogWeights::new(raw.clone()).weights().unwrap();
            let mut rev = w.clone();
            rev.reverse();
            let e = ess(&w).unwrap();
            prop_assert!((e - ess(&rev).unwrap()).abs() < 1e-9);
            prop_assert!(e >= 1.0 - 1e-12 && e <= w.len() as f64 + 1e-9);
        }
    }
}
