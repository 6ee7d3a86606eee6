use thiserror::Error;

/// Errors produced by simulation, training, and I/O.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A forced measurement record asked for an outcome whose Born
    /// probability is below [`crate::gaussian::EPS_PROB`].
    #[error("impossible outcome {outcome:+} at site {site}: probability {probability:.3e}")]
    ImpossibleOutcome {
        site: usize,
        outcome: i8,
        probability: f64,
    },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("config error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
