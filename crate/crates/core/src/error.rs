use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("interval below {0} is infinite")]
    IntervalInfinite(String),
    #[error("divisor set of {0} is infinite")]
    DivisorSetInfinite(String),
    #[error("module mismatch: {0}")]
    ModuleMismatch(String),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("representation does not cover fibre {0}")]
    MissingFibre(String),
    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}

pub type Result<T> = std::result::Result<T, Error>;
