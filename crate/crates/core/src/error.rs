use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("backend mismatch: {0} vs {1}")]
    BackendMismatch(String, String),
    #[error("division by zero")]
    DivisionByZero,
    #[error("precision exhausted: {0}")]
    PrecisionExhausted(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("wedge form vanishes identically (the two maps coincide)")]
    ZeroWedge,
    #[error("degree budget exceeded: degree {degree} > budget {budget}")]
    DegreeBudget { degree: u128, budget: u128 },
    #[error("seed point is exceptional")]
    ExceptionalSeed,
    #[error("root finder did not converge after {sweeps} sweeps")]
    NonConvergence { sweeps: usize },
    #[error("every atom evaluates to -inf")]
    AllAtomsInfinite,
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn unsupported<T>(what: impl Into<String>) -> Result<T> {
    Err(Error::Unsupported(what.into()))
}

pub(crate) fn invalid<T>(what: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(what.into()))
}
