use thiserror::Error;

/// Errors produced by the library and the experiment harness.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller supplied parameters outside an operation's preconditions.
    #[error("usage error: {0}")]
    Usage(String),

    /// Every arm with positive draw probability is excluded.
    #[error("no arm available: the exclusion set covers the reservoir's support")]
    NoArmAvailable,

    /// A run hit its configured sample cap before the stopping rule fired.
    #[error("sample budget of {budget} exhausted before the stopping rule was met")]
    BudgetExhausted { budget: u64 },

    /// An instance or config file could not be parsed.
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// Whether the error stems from invalid input rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::Usage(_) | Error::Parse { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
