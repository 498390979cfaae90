use thiserror::Error;

/// Failures that stop an experiment before a verdict exists.
#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("cannot read {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("cannot write {path}: {source}")]
    Write { path: String, source: std::io::Error },
    #[error("csv output: {0}")]
    Csv(#[from] csv::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// Process exit status: 2 for configuration problems, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Read { .. } => 2,
            _ => 1,
        }
    }
}

/// Core errors raised while building a model are configuration errors.
pub fn model_error(e: evolver_core::Error) -> CliError {
    CliError::Config(format!("{} ({})", e, e.kind()))
}
