use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate variance: {0}")]
    DegenerateVariance(String),

    #[error("degenerate surrogate: {0}")]
    DegenerateSurrogate(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("budget error: {0}")]
    Budget(String),

    #[error("budget exceeded in phase `{phase}`: charging {amount} would bring total to {total} > budget {budget}")]
    BudgetExceeded {
        phase: String,
        amount: f64,
        total: f64,
        budget: f64,
    },

    #[error("policy inapplicable: {0}")]
    PolicyInapplicable(String),

    #[error("policy degenerate: {0}")]
    PolicyDegenerate(String),

    #[error("solver did not converge after {iterations} iterations (relative residual {residual:e})")]
    Solver { iterations: usize, residual: f64 },

    #[error("rank error: requested {requested} modes from {available} snapshots")]
    Rank { requested: usize, available: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error("unsupported format version {found} (expected {expected})")]
    FormatVersion { found: u32, expected: u32 },

    #[error("corrupt file {path}: {reason}")]
    Corrupt { path: PathBuf, reason: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
