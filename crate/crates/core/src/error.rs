use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("invalid value for `{field}`: {constraint}")]
    Validation { field: String, constraint: String },

    #[error("unknown configuration key `{0}`")]
    UnknownKey(String),

    #[error("unknown preset `{0}` (expected scenario1 or scenario2)")]
    UnknownPreset(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("no feasible split: both paths are unusable for a traffic type with pending packets")]
    NoFeasibleSplit,

    #[error("interval {interval}: latency constraint violated at the optimum (objective {objective_s} s)")]
    Infeasible { interval: usize, objective_s: f64 },

    #[error("interval {interval}: {source}")]
    AtInterval {
        interval: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("cannot summarize an empty run")]
    EmptyRun,

    #[error("malformed trace: {0}")]
    Trace(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, constraint: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            constraint: constraint.into(),
        }
    }

    /// True for errors caused by the experiment description rather than the run.
    pub fn is_config_error(&self) -> bool {
        matches!(
            self,
            Error::Parse { .. } | Error::Validation { .. } | Error::UnknownKey(_) | Error::UnknownPreset(_)
        )
    }
}
