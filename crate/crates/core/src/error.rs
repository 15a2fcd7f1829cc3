use thiserror::Error;

use crate::syntax::Violation;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("metric violation: {0}")]
    MetricViolation(String),

    #[error("undeclared {kind} `{name}`")]
    DanglingName { kind: &'static str, name: String },

    #[error("{kind} `{name}` declared twice")]
    Duplicate { kind: &'static str, name: String },

    #[error("parse error at {line}:{column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("ill-formed network: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    IllFormed(Vec<Violation>),

    #[error("recursion on `{0}` is not time-guarded")]
    NotTimeGuarded(String),

    #[error("value {value} is not in the domain of `{name}`")]
    DomainViolation { name: String, value: String },

    #[error("state space budget of {limit} states exceeded ({frontier} states still on the frontier)")]
    StateSpaceBudgetExceeded {
        limit: usize,
        frontier: usize,
        /// A few pretty-printed frontier states, for diagnostics.
        sample: Vec<String>,
    },

    #[error("no observer context exists for action {0}")]
    UnobservableAction(String),

    #[error("invalid configuration: {0}")]
    ConfigViolation(String),
}

impl Error {
    pub(crate) fn dangling(kind: &'static str, name: impl ToString) -> Self {
        Error::DanglingName {
            kind,
            name: name.to_string(),
        }
    }
}
