use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point {point} lies outside the kernel domain {domain}")]
    Domain { point: f64, domain: String },

    #[error("invalid centers: {0}")]
    InvalidCenters(String),

    #[error("kernel matrix is too ill-conditioned (condition estimate {estimate:e} > {limit:e})")]
    Conditioning { estimate: f64, limit: f64 },

    #[error("{solver} did not converge after {iterations} iterations (last gap {last_gap:e})")]
    NonConvergence {
        solver: &'static str,
        iterations: usize,
        last_gap: f64,
    },

    #[error("invalid value for `{field}`: {message}")]
    Validation { field: String, message: String },

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("experiment failed: {0}")]
    Experiment(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("{context}: {source}")]
    Csv {
        context: String,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    pub(crate) fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for failures caused by numerical behaviour rather than bad input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Conditioning { .. } | Error::NonConvergence { .. } | Error::Numerical(_)
        )
    }
}
