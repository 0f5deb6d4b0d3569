use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A parameter is outside its admissible range.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    /// Input data is unreadable, non-finite or otherwise unusable.
    #[error("input error: {0}")]
    Input(String),

    #[error("sensor {0} not present in the data")]
    MissingSensor(u32),

    /// A metric was requested on a zero reference signal.
    #[error("undefined metric: {0}")]
    UndefinedMetric(String),

    /// Energy bookkeeping violated causality.
    #[error("energy accounting error: {0}")]
    Accounting(String),

    #[error("numerical failure: {0}")]
    Numeric(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_dim(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::DimensionMismatch { expected, found })
    }
}
