//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument fell outside the mathematical domain of an operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// Mismatched dimensions between related arguments.
    #[error("shape error: {0}")]
    Shape(String),

    /// A size cap was exceeded (e.g. partition enumeration blow-up guards).
    #[error("size error: {0}")]
    Size(String),

    /// Malformed input data (CSV, NDJSON, counts files).
    #[error("data error: {0}")]
    Data(String),

    /// Invalid run configuration or command usage.
    #[error("config error: {0}")]
    Config(String),

    /// Numerical failure (NaN in sampler state, degenerate likelihoods).
    #[error("numerical error: {0}")]
    Numerical(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub fn shape(msg: impl Into<String>) -> Self {
        Error::Shape(msg.into())
    }

    pub fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    pub fn data(msg: impl Into<String>) -> Self {
        Error::Data(msg.into())
    }

    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn numerical(msg: impl Into<String>) -> Self {
        Error::Numerical(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
