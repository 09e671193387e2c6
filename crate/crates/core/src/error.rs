use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A constructor invariant was violated.
    #[error("invalid {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// A function was evaluated outside the domain where it is defined.
    #[error("domain error in {op}: {reason}")]
    Domain { op: &'static str, reason: String },

    /// The requested per-cell power exceeds what the cell can deliver.
    #[error(
        "infeasible power at t = {time_s} s: requested {requested_w_per_ah} W/Ah, \
         deliverable maximum {max_w_per_ah} W/Ah"
    )]
    InfeasiblePower {
        time_s: f64,
        requested_w_per_ah: f64,
        max_w_per_ah: f64,
    },

    /// Effective capacity needs a trace that terminated at the cutoff voltage.
    #[error("effective capacity undefined: discharge ended by {0} before reaching cutoff")]
    UndefinedCapacity(String),

    #[error("battery designator {0:?} is not of the form <N>S[<M>P]")]
    BadDesignator(String),

    #[error("fit failed: {0}")]
    Fit(String),

    #[error("design matrix is rank deficient: {0}")]
    RankDeficient(String),

    #[error("non-finite objective at parameters {params:?}")]
    NonFiniteObjective { params: Vec<f64> },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: &std::path::Path, err: impl std::fmt::Display) -> Self {
        Error::Io {
            path: path.display().to_string(),
            message: err.to_string(),
        }
    }
}
