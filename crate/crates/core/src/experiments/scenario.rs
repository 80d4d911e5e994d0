use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::eval::ClppdMode;
use crate::model::{generate_cure, Model, Role, WeibullCure};
use crate::rng::Stream;
use crate::smc::{run_smc, SmcConfig};
use crate::tsmc::{BetaPrior, DEFAULT_GRID};
use crate::{Error, Result};

/// The two simulation studies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Example {
    Linear,
    Cure,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Linear => "linear",
            Example::Cure => "cure",
        }
    }

    pub fn theta_target(self) -> Vec<f64> {
        match self {
            Example::Linear => vec![5.0, 3.0, 2.0],
            Example::Cure => vec![0.163, -0.299, 0.120, -0.287, 0.276, 1.103, -0.538],
        }
    }

    pub fn default_n_source(self) -> usize {
        match self {
            Example::Linear => 80,
            Example::Cure => 300,
        }
    }
}

impl std::fmt::Display for Example {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Example {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "linear" => Ok(Example::Linear),
            "cure" => Ok(Example::Cure),
            other => Err(Error::InvalidArgument(format!(
                "unknown example `{other}` (expected linear or cure)"
            ))),
        }
    }
}

/// Target parameters and the per-parameter scale of the source shift.
#[derive(Debug, Clone, PartialEq)]
pub struct ShiftScheme {
    pub example: Example,
    pub theta_target: Vec<f64>,
    pub s_hat: Vec<f64>,
}

impl ShiftScheme {
    /// `(5 + 2 k s, 3 - 2 k s, 2 + k s_var)` with `s = 0.15`, `s_var = 0.125`.
    pub fn linear() -> Self {
        ShiftScheme {
            example: Example::Linear,
            theta_target: Example::Linear.theta_target(),
            s_hat: vec![0.15, 0.15, 0.125],
        }
    }

    /// `theta_T + 2 k s_hat` componentwise.
    pub fn cure(s_hat: Vec<f64>) -> Self {
        ShiftScheme {
            example: Example::Cure,
            theta_target: Example::Cure.theta_target(),
            s_hat,
        }
    }

    pub fn theta_source(&self, k: u32) -> Vec<f64> {
        let k = f64::from(k);
        let (t, s) = (&self.theta_target, &self.s_hat);
        match self.example {
            Example::Linear => vec![
                t[0] + 2.0 * k * s[0],
                t[1] - 2.0 * k * s[1],
                t[2] + k * s[2],
            ],
            Example::Cure => t.iter().zip(s).map(|(a, b)| a + 2.0 * k * b).collect(),
        }
    }
}

/// Seed of the fixed pilot fit that sets the cure-model shift scale.
pub const PILOT_SEED: u64 = 1690;
pub const PILOT_PARTICLES: usize = 4000;
/// Size of the pilot dataset: the default target plus source size.
pub const PILOT_SIZE: usize = DEFAULT_N_TARGET + 300;

/// Marginal posterior standard deviations (natural scale) of a pilot fit on
/// one fixed dataset of [`PILOT_SIZE`] draws from the target process. Computed once per process.
pub fn cure_pilot_s_hat() -> Result<Vec<f64>> {
    static CACHE: OnceLock<Vec<f64>> = OnceLock::new();
    if let Some(v) = CACHE.get() {
        return Ok(v.clone());
    }
    let stream = Stream::root(PILOT_SEED);
    let data = generate_cure(
        PILOT_SIZE,
        &Example::Cure.theta_target(),
        Role::Target,
        &mut stream.named("data").rng(),
    )?;
    let post = run_smc(
        &WeibullCure,
        data.observations(),
        &SmcConfig::new(PILOT_PARTICLES),
        stream.named("fit"),
    )?;
    let natural: Vec<Vec<f64>> = post
        .population
        .particles
        .rows()
        .map(|r| WeibullCure.constrain(r))
        .collect();
    let s_hat = (0..WeibullCure.dim())
        .map(|j| {
            let col: Vec<f64> = natural.iter().map(|r| r[j]).collect();
            crate::eval::stdev(&col)
        })
        .collect::<Result<Vec<f64>>>()?;
    log::info!("cure pilot shift scale: {s_hat:?}");
    Ok(CACHE.get_or_init(|| s_hat).clone())
}

/// Values that replace scenario defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioOverrides {
    pub n_target: Option<usize>,
    pub n_source: Option<usize>,
    pub replicates: Option<usize>,
    pub particles: Option<usize>,
    /// Set from the run seed, never from a config section.
    #[serde(skip)]
    pub root_seed: Option<u64>,
    pub grid: Option<usize>,
    pub npp_a: Option<f64>,
    pub npp_b: Option<f64>,
    pub npp_samples: Option<usize>,
    pub clppd_mode: Option<ClppdMode>,
    pub s_hat: Option<Vec<f64>>,
}

/// Everything needed to run one (example, k) cell.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub example: Example,
    pub k: u32,
    pub n_target: usize,
    pub n_source: usize,
    pub replicates: usize,
    pub particles: usize,
    pub root_seed: u64,
    pub grid: usize,
    pub npp_prior: BetaPrior,
    /// Joint NPP draws per replicate.
    pub npp_samples: usize,
    pub clppd_mode: ClppdMode,
    pub shift: ShiftScheme,
    pub theta_source: Vec<f64>,
}

impl ScenarioConfig {
    pub fn id(&self) -> String {
        format!("{}-k{}", self.example, self.k)
    }

    pub fn theta_target(&self) -> &[f64] {
        &self.shift.theta_target
    }
}

pub const DEFAULT_REPLICATES: usize = 20;
pub const DEFAULT_PARTICLES: usize = 1000;
pub const DEFAULT_N_TARGET: usize = 40;
pub const DEFAULT_ROOT_SEED: u64 = 1;
pub const FULL_REPLICATES: usize = 100;
pub const FULL_PARTICLES: usize = 2000;

impl ScenarioOverrides {
    /// Fills unset replicate and particle counts with the full-study values.
    pub fn full_scale(mut self) -> Self {
        self.replicates.get_or_insert(FULL_REPLICATES);
        self.particles.get_or_insert(FULL_PARTICLES);
        self
    }
}

/// Desk-scale defaults for `(example, k)` with `overrides` applied last.
pub fn make_scenario(
    example: Example,
    k: u32,
    overrides: &ScenarioOverrides,
) -> Result<ScenarioConfig> {
    if k > 3 {
        return Err(Error::InvalidArgument(format!(
            "shift level k = {k} outside 0..=3"
        )));
    }
    let shift = match (example, &overrides.s_hat) {
        (_, Some(s)) => {
            if s.len() != example.theta_target().len() {
                return Err(Error::InvalidArgument(format!(
                    "s_hat needs {} entries for the {example} example",
                    example.theta_target().len()
                )));
            }
            ShiftScheme {
                example,
                theta_target: example.theta_target(),
                s_hat: s.clone(),
            }
        }
        (Example::Linear, None) => ShiftScheme::linear(),
        (Example::Cure, None) => ShiftScheme::cure(cure_pilot_s_hat()?),
    };
    let particles = overrides.particles.unwrap_or(DEFAULT_PARTICLES);
    let npp_prior = BetaPrior {
        a: overrides.npp_a.unwrap_or(1.0),
        b: overrides.npp_b.unwrap_or(1.0),
    };
    if !(npp_prior.a > 0.0 && npp_prior.b > 0.0) {
        return Err(Error::InvalidArgument(
            "Beta prior parameters must be positive".into(),
        ));
    }
    let cfg = ScenarioConfig {
        example,
        k,
        n_target: overrides.n_target.unwrap_or(DEFAULT_N_TARGET),
        n_source: overrides.n_source.unwrap_or(example.default_n_source()),
        replicates: overrides.replicates.unwrap_or(DEFAULT_REPLICATES),
        particles,
        root_seed: overrides.root_seed.unwrap_or(DEFAULT_ROOT_SEED),
        grid: overrides.grid.unwrap_or(DEFAULT_GRID),
        npp_prior,
        npp_samples: overrides.npp_samples.unwrap_or(particles),
        clppd_mode: overrides.clppd_mode.unwrap_or_default(),
        theta_source: shift.theta_source(k),
        shift,
    };
    if cfg.n_target < 2 || cfg.n_source < 1 || cfg.replicates < 1 || cfg.grid < 2 {
        return Err(Error::InvalidArgument(
            "need n_target >= 2, n_source >= 1, replicates >= 1 and grid >= 2".into(),
        ));
    }
    Ok(cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn linear_shift_rule() {
        let o = ScenarioOverrides::default();
        assert_eq!(
            make_scenario(Example::Linear, 0, &o).unwrap().theta_source,
            vec![5.0, 3.0, 2.0]
        );
        let s = make_scenario(Example::Linear, 2, &o).unwrap().theta_source;
        for (a, b) in s.iter().zip([5.6, 2.4, 2.25]) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn cure_shift_uses_supplied_scale() {
        let o = ScenarioOverrides {
            s_hat: Some(vec![0.1; 7]),
            ..Default::default()
        };
        let c = make_scenario(Example::Cure, 1, &o).unwrap();
        for (s, t) in c.theta_source.iter().zip(Example::Cure.theta_target()) {
            assert_abs_diff_eq!(*s, t + 0.2, epsilon = 1e-12);
        }
        assert_eq!(c.n_source, 300);
        assert_eq!(
            make_scenario(Example::Cure, 0, &o).unwrap().theta_source,
            Example::Cure.theta_target()
        );
    }

    #[test]
    fn rejects_bad_inputs() {
        let o = ScenarioOverrides::default();
        assert!(make_scenario(Example::Linear, 4, &o).is_err());
        assert!("probit".parse::<Example>().is_err());
        let bad = ScenarioOverrides {
            s_hat: Some(vec![0.1; 2]),
            ..Default::default()
        };
        assert!(make_scenario(Example::Linear, 1, &bad).is_err());
    }
}
