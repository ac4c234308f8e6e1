use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an input value or configuration was violated.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// TCP and hand positions coincide; the approach direction is undefined.
    #[error("degenerate geometry: tcp and hand coincide")]
    DegenerateGeometry,

    /// A sample or trace record stream violated its ordering/format contract.
    #[error("stream error at record {index}: {reason}")]
    Stream { index: usize, reason: String },

    /// Config or trace file could not be parsed.
    #[error("parse error: {0}")]
    Parse(String),

    /// Statistic is undefined for the given data (e.g. zero variance everywhere).
    #[error("undefined statistic: {0}")]
    UndefinedStatistic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
