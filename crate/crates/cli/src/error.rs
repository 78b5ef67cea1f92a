use std::path::PathBuf;

use thiserror::Error;

/// Failure classes of the command-line runner, each with its own exit code.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Numeric(_) => 3,
            CliError::Io(_) => 4,
        }
    }

    /// Same class, message prefixed with `what`.
    pub fn context(self, what: &str) -> Self {
        match self {
            CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
            CliError::Numeric(m) => CliError::Numeric(format!("{what}: {m}")),
            CliError::Io(m) => CliError::Io(format!("{what}: {m}")),
        }
    }

    pub fn io(path: impl Into<PathBuf>, e: std::io::Error) -> Self {
        CliError::Io(format!("{:?}: {e}", path.into()))
    }
}

fn class_of(e: &kdac_core::Error) -> fn(String) -> CliError {
    use kdac_core::Error as E;
    match e {
        E::InvalidParameter { .. } | E::DimensionMismatch { .. } => CliError::Config,
        E::Divergence { .. } => CliError::Numeric,
        E::Subspace { source, .. } => class_of(source),
        E::Format { .. } | E::Io { .. } | E::Png { .. } => CliError::Io,
    }
}

impl From<kdac_core::Error> for CliError {
    fn from(e: kdac_core::Error) -> Self {
        class_of(&e)(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;
