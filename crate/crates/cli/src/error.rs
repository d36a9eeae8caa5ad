use std::path::PathBuf;

use thiserror::Error;

/// Failures of a CLI invocation, each mapped to an exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Validation(Vec<String>),

    #[error(transparent)]
    Solver(#[from] kirchpore::Error),

    #[error("acceptance threshold missed: {0}")]
    Acceptance(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    /// 2 validation, 3 nonlinear solver failure, 4 threshold missed,
    /// 1 anything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 2,
            CliError::Solver(kirchpore::Error::InvalidParameter { .. }) => 2,
            CliError::Solver(kirchpore::Error::NonConvergence { .. }) => 3,
            CliError::Acceptance(_) => 4,
            _ => 1,
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.into(),
            source,
        }
    }
}
