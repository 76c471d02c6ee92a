use thiserror::Error;

/// Errors raised by the numerical routines and the harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("index out of range: {0}")]
    Index(String),

    #[error("unsupported dimension {0}")]
    Dimension(usize),

    #[error("configuration error: {0}")]
    Configuration(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("missing capability: {0}")]
    Capability(String),

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("usage error: {0}")]
    Usage(String),
}

pub type Result<T> = std::result::Result<T, Error>;
