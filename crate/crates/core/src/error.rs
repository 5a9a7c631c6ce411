use thiserror::Error;

/// Errors raised by the library and the CLI.
///
/// Input errors and precondition failures are kept apart from verification
/// outcomes: a check that runs and fails produces a report with `pass = false`,
/// never an `Err`.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("unsupported Lorentz index (p = {p}, q = {q}): p = inf requires q = inf")]
    UnsupportedIndex { p: f64, q: f64 },

    #[error("undefined ratio: {0}")]
    UndefinedRatio(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
