use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("row for a={base}, N={order} needs {needed} entries, budget is {budget}")]
    BudgetExceeded {
        base: u64,
        order: u32,
        needed: u128,
        budget: u128,
    },

    #[error("value table does not cover index {index}")]
    DomainCoverage { index: i64 },

    #[error("malformed b-file line {line}: {reason}")]
    MalformedBFile { line: usize, reason: String },

    #[error("malformed cache file {}: {reason}", path.display())]
    MalformedCache { path: PathBuf, reason: String },

    #[error("mgf overflows f64 at t={t} (t * a^N = {exponent})")]
    Overflow { t: f64, exponent: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}
