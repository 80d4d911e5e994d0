//! Run configuration files.
//!
//! ```toml
//! [run]
//! seed = 1
//! workers = 4
//! out = "results"
//!
//! [experiment]
//! example = "linear"
//! ks = [0, 1, 2, 3]
//!
//! [scenario]
//! replicates = 20
//! particles = 1000
//! ```
//!
//! Every key is optional. Command-line flags are applied on top with the
//! `merge_*` style setters, and the effective result is written next to the
//! outputs with [`RunConfig::save`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::experiments::{Example, ScenarioOverrides};
use crate::{Error, Result};

pub const DEFAULT_SEED: u64 = 1;
pub const DEFAULT_KS: [u32; 4] = [0, 1, 2, 3];

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSection {
    pub seed: Option<u64>,
    pub workers: Option<usize>,
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub example: Option<Example>,
    pub ks: Option<Vec<u32>>,
    /// Full-study replicate and particle counts for keys left unset.
    pub full_scale: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub run: RunSection,
    pub experiment: ExperimentSection,
    pub scenario: ScenarioOverrides,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    /// Writes the configuration preceded by `comment` lines (each prefixed `# `).
    pub fn save(&self, path: &Path, comment: &str) -> Result<()> {
        let mut text = String::new();
        for line in comment.lines() {
            text.push_str("# ");
            text.push_str(line);
            text.push('\n');
        }
        text.push_str(&self.to_toml()?);
        std::fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn seed(&self) -> u64 {
        self.run.seed.unwrap_or(DEFAULT_SEED)
    }

    /// Configured worker count, else the machine's available parallelism.
    pub fn workers(&self) -> usize {
        self.run
            .workers
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
    }

    pub fn ks(&self) -> Vec<u32> {
        self.experiment
            .ks
            .clone()
            .unwrap_or_else(|| DEFAULT_KS.to_vec())
    }

    /// Scenario overrides with the run seed filled in.
    pub fn overrides(&self) -> ScenarioOverrides {
        let o = ScenarioOverrides {
            root_seed: Some(self.seed()),
            ..self.scenario.clone()
        };
        if self.experiment.full_scale == Some(true) {
            o.full_scale()
        } else {
            o
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.run.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        if self.experiment.ks.as_ref().is_some_and(|ks| ks.is_empty()) {
            return Err(Error::Config("ks must not be empty".into()));
        }
        Ok(())
    }
}
