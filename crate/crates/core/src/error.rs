use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cannot zero-pad a length-{len} vector to length {target}")]
    InvalidPadding { len: usize, target: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid value for `{key}`: {reason}")]
    InvalidConfig { key: String, reason: String },

    #[error("missing required key `{0}`")]
    MissingKey(String),

    #[error("unknown key `{0}`")]
    UnknownKey(String),

    #[error("direct-link taps L={l} exceed reflected-link taps L0={l0}")]
    Truncation { l: usize, l0: usize },

    #[error("pilot tone {index} has magnitude {magnitude:e}, cannot invert")]
    PilotNotInvertible { index: usize, magnitude: f64 },

    #[error("training plus delay ({overhead} symbols) leaves no data time within coherence time {coherence}")]
    NoDataTime { overhead: f64, coherence: f64 },

    #[error("water-filling needs at least one subcarrier with positive gain")]
    NoUsableSubcarrier,

    #[error("number of Monte Carlo draws must be at least 1")]
    InvalidDraws,

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },
}

impl Error {
    /// Whether the error comes from a missing, unknown or invalid setting.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::InvalidConfig { .. } | Error::MissingKey(_) | Error::UnknownKey(_) | Error::Truncation { .. }
        )
    }

    pub(crate) fn config(key: &str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            key: key.to_string(),
            reason: reason.into(),
        }
    }
}
