use thiserror::Error;

/// Errors raised by the analysis and simulation pipelines.
///
/// The variants split into two families that callers (notably the CLI) map
/// onto different exit codes: malformed input versus a mathematically
/// inadmissible request.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("math domain error: {0}")]
    Domain(String),

    #[error("integer overflow while converting {0}")]
    Overflow(&'static str),

    #[error("linear program is unbounded")]
    Unbounded,

    #[error("quadrature did not converge (achieved error estimate {achieved:e})")]
    Quadrature { achieved: f64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for errors caused by the shape or content of user input rather
    /// than by the mathematics of a well-formed request.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::Json(_))
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
