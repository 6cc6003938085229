use thiserror::Error;

/// Errors raised by the numerical pipeline.
///
/// The variants map onto the CLI exit statuses: `Invariant` is an assertion
/// failure, `Config` a configuration error and `Computation` a numerical one.
#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("computation error: {message}")]
    Computation {
        message: String,
        /// Residual history or other numeric diagnostics, newest last.
        diagnostics: Vec<f64>,
    },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("skipped: {0}")]
    Skipped(String),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("solve refused: {0}")]
    Refused(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn computation(message: impl Into<String>, diagnostics: Vec<f64>) -> Self {
        Error::Computation {
            message: message.into(),
            diagnostics,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
