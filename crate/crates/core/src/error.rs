use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("truncation tail {tail:.3e} exceeds tolerance {tolerance:.3e} at cutoff {cutoff}")]
    Truncation { tail: f64, tolerance: f64, cutoff: usize },
    #[error("outcome probability {probability:.3e} is below the resolvable floor")]
    ZeroProbability { probability: f64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("state has zero norm")]
    ZeroNorm,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("post-selection threshold {f_min} exceeds the best outcome fidelity {best}")]
    Infeasible { f_min: f64, best: f64 },
    #[error("{flipped} modes carry sign flips; the code corrects at most one")]
    Uncorrectable { flipped: usize },
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
