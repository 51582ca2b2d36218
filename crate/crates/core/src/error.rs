use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = GmiError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GmiError {
    #[error("invalid record {index}: {reason}")]
    InvalidRecord { index: usize, reason: String },

    #[error("records disagree on covariate arity: record {index} has {found}, expected {expected}")]
    InconsistentArity {
        index: usize,
        expected: String,
        found: String,
    },

    #[error("need at least {needed} subjects, got {got}")]
    TooFewSubjects { needed: usize, got: usize },

    #[error("sample standard deviation of log t0 is zero; bandwidth is undefined")]
    DegenerateBandwidth,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error(
        "{0} continuous covariates supplied; at most 2 are supported. Reduce them to a \
         single risk score (e.g. a linear predictor from a censoring-time model) first"
    )]
    CovariateDimension(usize),

    #[error("need at least {needed} events, found {found}")]
    TooFewEvents { needed: usize, found: usize },

    #[error("maximum likelihood fit did not converge (gradient inf-norm {grad_norm:.3e})")]
    NonConvergence { grad_norm: f64 },

    #[error("bootstrap produced fewer than two defined estimates ({defined} of {resamples})")]
    BootstrapUndefined { defined: usize, resamples: usize },

    #[error("calibration target {target} is outside the bracket [{low}, {high}]")]
    CalibrationBracket { target: f64, low: f64, high: f64 },

    #[error("{failed} of {replicates} replicates failed for {method}, above the 1% limit")]
    ReplicateFailures {
        method: String,
        failed: usize,
        replicates: usize,
    },

    #[error("{path}: line {line}: {message}")]
    Parse { path: PathBuf, line: u64, message: String },

    #[error("{path}: {message}")]
    Data { path: PathBuf, message: String },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
