use std::path::PathBuf;

use fracprog_core::FpError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("solver error: {0}")]
    Solve(#[from] FpError),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        CliError::Io { path: path.into(), source }
    }

    /// 2 for bad configs, 3 for invariant violations and solver failures, 4 for I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Invariant(_) => 3,
            CliError::Io { .. } => 4,
            CliError::Solve(FpError::InvalidInput(_) | FpError::Refused(_)) => 2,
            CliError::Solve(_) => 3,
        }
    }
}

pub type Result<T, E = CliError> = std::result::Result<T, E>;
