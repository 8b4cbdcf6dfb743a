use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Core(#[from] catsim_core::Error),
    #[error("{failed} acceptance row(s) failed")]
    Acceptance { failed: usize },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl CliError {
    pub fn config(msg: impl Into<String>) -> Self {
        CliError::Config(msg.into())
    }

    /// 1 for bad input, 2 for failed acceptance rows, 3 for numerical
    /// failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Acceptance { .. } => 2,
            CliError::Core(
                catsim_core::Error::Truncation { .. } | catsim_core::Error::ZeroProbability { .. } | catsim_core::Error::ZeroNorm,
            ) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, CliError>;
