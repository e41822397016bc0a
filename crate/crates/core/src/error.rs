use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by map construction, evaluation and the experiments built on top.
#[derive(Debug, Error)]
pub enum Error {
    #[error("point {x} lies outside the domain [{lo}, {hi}]")]
    Domain { x: f64, lo: f64, hi: f64 },

    #[error("{what} did not converge after {iterations} iterations")]
    Numeric { what: &'static str, iterations: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("missing-branch condition fails: margin {margin} is below the required {required}")]
    ConditionFails { margin: f64, required: f64 },

    #[error("epsilon {epsilon} too large: the largest admissible value is {max_admissible}")]
    EpsilonTooLarge { epsilon: f64, max_admissible: f64 },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("budget exceeded: {needed} cylinders requested, budget is {budget}")]
    Budget { needed: u128, budget: u64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

impl Error {
    /// Short machine-readable tag used in error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain { .. } => "domain",
            Error::Numeric { .. } => "numeric",
            Error::InvalidMap(_) => "invalid_map",
            Error::ConditionFails { .. } => "condition_fails",
            Error::EpsilonTooLarge { .. } => "epsilon_too_large",
            Error::Precondition(_) => "precondition",
            Error::Budget { .. } => "budget",
            Error::Parse(_) => "parse",
            Error::Io(_) => "io",
        }
    }
}
