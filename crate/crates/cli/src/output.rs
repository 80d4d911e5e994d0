use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::Serialize;
use tsmc_core::config::RunConfig;

use crate::error::{CliError, Result};

/// First-line comment of every output file.
pub fn header(seed: u64) -> String {
    format!("tsmc {} seed={seed}", tsmc_core::VERSION)
}

pub fn out_dir(cfg: &RunConfig, default: &str) -> Result<PathBuf> {
    let dir = cfg
        .run
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(default));
    std::fs::create_dir_all(&dir).map_err(|e| CliError::Input {
        path: dir.clone(),
        message: format!("cannot create output directory: {e}"),
    })?;
    Ok(dir)
}

/// Writes `config.toml` with the effective configuration.
pub fn save_config(dir: &Path, cfg: &RunConfig) -> Result<()> {
    cfg.save(
        &dir.join("config.toml"),
        &format!("{}\neffective configuration", header(cfg.seed())),
    )?;
    Ok(())
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| CliError::Input {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

#[derive(Serialize)]
struct RunInfo<'a> {
    command: &'a str,
    started_unix: u64,
    finished_unix: u64,
    elapsed_seconds: f64,
}

/// Wall-clock record kept apart from the reproducible outputs.
pub struct Clock {
    command: &'static str,
    started: SystemTime,
    timer: Instant,
}

impl Clock {
    pub fn start(command: &'static str) -> Self {
        Clock {
            command,
            started: SystemTime::now(),
            timer: Instant::now(),
        }
    }

    /// Writes `run-info.toml` into `dir`.
    pub fn finish(&self, dir: &Path, seed: u64) -> Result<()> {
        let secs = |t: SystemTime| t.duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs());
        let info = RunInfo {
            command: self.command,
            started_unix: secs(self.started),
            finished_unix: secs(SystemTime::now()),
            elapsed_seconds: self.timer.elapsed().as_secs_f64(),
        };
        let text = toml::to_string(&info).map_err(|e| CliError::Usage(e.to_string()))?;
        write_text(
            &dir.join("run-info.toml"),
            &format!("# {}\n{text}", header(seed)),
        )
    }
}
