use thiserror::Error;

/// Unified error type for the toolkit.
///
/// `InvalidInput` and `DimensionMismatch` map to CLI exit 1 (usage error);
/// numeric failures (`NoConvergence`) surface in reports and map to exit 2
/// when they break an asserted check.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("no convergence: {0}")]
    NoConvergence(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON at line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        // Structurally valid JSON carrying invalid content is a domain
        // error, not a parse error; only true parse failures get the
        // line/column framing.
        if e.classify() == serde_json::error::Category::Data {
            Error::InvalidInput(e.to_string())
        } else {
            Error::Json {
                line: e.line(),
                column: e.column(),
                message: e.to_string(),
            }
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
