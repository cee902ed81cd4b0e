use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value is missing, malformed or out of range. `key` names
    /// the offending entry using dotted paths (`params.tau`).
    #[error("invalid config `{key}`: {message}")]
    Config { key: String, message: String },

    /// Fixed-step integration would be unstable or inaccurate.
    #[error(
        "step too large: h*||H|| = {product:.4} at t = {time} exceeds {limit} \
         (h = {step}, ||H|| = {norm:.4}); reduce `params.step`"
    )]
    StepTooLarge {
        time: f64,
        step: f64,
        norm: f64,
        product: f64,
        limit: f64,
    },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("unknown metric `{0}`")]
    UnknownMetric(String),

    #[error("scan has no axes")]
    EmptyAxes,

    #[error("scan grid has {size} points, exceeding the cap of {cap}")]
    CapExceeded { size: usize, cap: usize },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code used by the command-line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. }
            | Error::UnknownMetric(_)
            | Error::EmptyAxes
            | Error::CapExceeded { .. }
            | Error::DimensionMismatch { .. }
            | Error::Json(_) => 2,
            Error::StepTooLarge { .. } => 3,
            Error::Io { .. } | Error::Csv(_) => 4,
        }
    }
}
