use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad flags, unreadable or malformed inputs.
    #[error("{0}")]
    Usage(String),

    #[error("{path}: {message}")]
    Input { path: PathBuf, message: String },

    #[error("{failed} of {total} replicates failed; see the log and summary.toml")]
    Partial { failed: usize, total: usize },

    #[error(transparent)]
    Core(#[from] tsmc_core::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        use tsmc_core::Error as E;
        match self {
            CliError::Usage(_) | CliError::Input { .. } => 2,
            CliError::Partial { .. } => 3,
            CliError::Core(e) => match e {
                E::InvalidArgument(_)
                | E::InvalidObservation { .. }
                | E::Config(_)
                | E::TraceFormat(_)
                | E::Csv(_)
                | E::Io { .. } => 2,
                _ => 1,
            },
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
