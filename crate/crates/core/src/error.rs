use thiserror::Error;

/// Errors raised by the algebra, the characteristic-form kernels and the suites.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Caller violated a precondition (dimension mismatch, bad index, bad shape).
    #[error("usage error: {0}")]
    Usage(String),
    /// A hard size cap was exceeded.
    #[error("resource error: {0}")]
    Resource(String),
    /// A series failed to converge or a numeric scheme became unstable.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// A determinant or denominator vanished where it must not.
    #[error("singular argument: {0}")]
    Singular(String),
    /// Malformed configuration input.
    #[error("line {line}: {msg}")]
    Config { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn usage<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Usage(msg.into()))
}
