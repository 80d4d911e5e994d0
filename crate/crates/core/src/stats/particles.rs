use super::weights::LogWeights;
use crate::{Error, Result};

/// `N` parameter vectors of dimension `d` (row-major, unconstrained space)
/// with their log-weights.
#[derive(Debug, Clone, PartialEq)]
pub struct ParticleSystem {
    dim: usize,
    values: Vec<f64>,
    log_weights: LogWeights,
}

impl ParticleSystem {
    pub fn new(dim: usize, values: Vec<f64>, log_weights: LogWeights) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument(
                "particle dimension must be >= 1".into(),
            ));
        }
        if values.len() % dim != 0 {
            return Err(Error::InvalidArgument(format!(
                "{} values do not form rows of length {dim}",
                values.len()
            )));
        }
        let n = values.len() / dim;
        if n < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 particles, got {n}"
            )));
        }
        if n != log_weights.len() {
            return Err(Error::InvalidArgument(format!(
                "{n} particles but {} log-weights",
                log_weights.len()
            )));
        }
        if let Some(bad) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "non-finite entry in particle {}",
                bad / dim
            )));
        }
        Ok(ParticleSystem {
            dim,
            values,
            log_weights,
        })
    }

    pub fn equally_weighted(dim: usize, values: Vec<f64>) -> Result<Self> {
        let n = if dim == 0 { 0 } else { values.len() / dim };
        Self::new(dim, values, LogWeights::uniform(n))
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::InvalidArgument("ragged particle rows".into()));
        }
        Self::equally_weighted(dim, rows.concat())
    }

    pub fn len(&self) -> usize {
        self.values.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl ExactSizeIterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn log_weights(&self) -> &LogWeights {
        &self.log_weights
    }

    pub fn set_log_weights(&mut self, log_weights: LogWeights) {
        assert_eq!(log_weights.len(), self.len());
        self.log_weights = log_weights;
    }

    /// Column `j` across all particles.
    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    /// New equally weighted system made of the rows at `indices`.
    pub fn select(&self, indices: &[usize]) -> ParticleSystem {
        let mut values = Vec::with_capacity(indices.len() * self.dim);
        for &i in indices {
            values.extend_from_slice(self.row(i));
        }
        ParticleSystem {
            dim: self.dim,
            values,
            log_weights: LogWeights::uniform(indices.len()),
        }
    }

    /// Applies `f` to every row, producing a new equally weighted system.
    pub fn map_rows(&self, mut f: impl FnMut(&[f64]) -> Vec<f64>) -> Result<ParticleSystem> {
        let rows: Vec<Vec<f64>> = self.rows().map(&mut f).collect();
        let mut out = Self::from_rows(&rows)?;
        out.log_weights = self.log_weights.clone();
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_shapes() {
        assert!(ParticleSystem::equally_weighted(2, vec![0.0; 3]).is_err());
        assert!(ParticleSystem::equally_weighted(2, vec![0.0; 2]).is_err());
        assert!(ParticleSystem::equally_weighted(0, vec![]).is_err());
        assert!(ParticleSystem::equally_weighted(1, vec![0.0, f64::NAN]).is_err());
        assert!(ParticleSystem::new(1, vec![0.0, 1.0], LogWeights::uniform(3)).is_err());
    }

    #[test]
    fn select_and_columns() {
        let s =
            ParticleSystem::from_rows(&[vec![0.0, 1.0], vec![2.0, 3.0], vec![4.0, 5.0]]).unwrap();
        assert_eq!(s.len(), 3);
        assert_eq!(s.column(1), vec![1.0, 3.0, 5.0]);
        let t = s.select(&[2, 2, 0]);
        assert_eq!(t.row(1), &[4.0, 5.0]);
        assert!(t.log_weights().is_uniform());
    }
}
