//! Error type shared across the crate.

/// Crate-wide error type.
///
/// Variants map onto the CLI exit codes: configuration and usage problems
/// exit with 1, data problems with 2, numeric failures with 3.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Invalid configuration or arguments (bad layer sizes, empty ranges, ...).
    #[error("configuration error: {0}")]
    Config(String),

    /// Shape mismatch between values that must agree.
    #[error("dimension mismatch: {0}")]
    Dim(String),

    /// Problems with input data (missing columns, empty bins, degenerate axes).
    #[error("data error: {0}")]
    Data(String),

    /// Numeric failure: non-finite values, failed factorizations, divergence.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// API misuse that depends on call order (e.g. backward without a tape).
    #[error("state error: {0}")]
    State(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// CLI exit code for this error kind: 1 usage, 2 data, 3 numeric.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) | Error::Dim(_) | Error::State(_) => 1,
            Error::Data(_) | Error::Io(_) => 2,
            Error::Numeric(_) => 3,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
