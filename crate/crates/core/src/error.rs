use thiserror::Error;

/// Errors raised by the shift-space machinery.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid generator: index {index} is outside 1..={rank}")]
    InvalidGenerator { index: usize, rank: usize },

    #[error("malformed ball: {0}")]
    MalformedBall(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("unsupported mode: {0}")]
    UnsupportedMode(String),

    /// `completed` carries the largest radius that finished before the cap was hit, when that
    /// notion applies.
    #[error("budget exceeded while {what}: needs {needed}, limit is {limit}")]
    BudgetExceeded {
        what: String,
        needed: String,
        limit: u64,
        completed: Option<usize>,
    },

    #[error("internal invariant violated: {0}")]
    Internal(String),
}

impl Error {
    pub(crate) fn budget(what: impl Into<String>, needed: impl ToString, limit: u64) -> Self {
        Error::BudgetExceeded {
            what: what.into(),
            needed: needed.to_string(),
            limit,
            completed: None,
        }
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
