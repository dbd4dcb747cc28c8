use thiserror::Error;

/// Errors produced by the evaluators, samplers and harnesses.
#[derive(Debug, Error)]
pub enum Error {
    #[error("argument out of domain: {0}")]
    Domain(String),

    /// The marginal density is unbounded at the origin.
    #[error("density has a pole at the origin")]
    PoleAtOrigin,

    #[error("quadrature tolerance not met (estimate {estimate:e}, error {error:e})")]
    ToleranceNotMet { estimate: f64, error: f64 },

    #[error("unsupported configuration: {0}")]
    Unsupported(String),

    /// The oracle threshold is non-positive because v <= 1.
    #[error("degenerate oracle: v = {0} <= 1")]
    DegenerateOracle(f64),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("need at least {needed} retained draws, got {got}")]
    TooFewDraws { needed: usize, got: usize },

    #[error("non-finite value: {0}")]
    NonFinite(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}
