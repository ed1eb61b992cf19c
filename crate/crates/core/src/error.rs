use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the toolkit.
///
/// Variants split into invalid-input failures and numerical failures; the CLI
/// maps them to exit codes 1 and 2 via [`Error::is_numerical`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("game structures differ: {0}")]
    StructureMismatch(String),

    #[error("strategy does not match the game: {0}")]
    ShapeMismatch(String),

    #[error("strategy of agent {agent} touches the simplex boundary (entry {action} = {value:e})")]
    Boundary {
        agent: usize,
        action: usize,
        value: f64,
    },

    #[error("KL divergence is infinite: agent {agent}, action {action} has zero reference mass")]
    InfiniteDivergence { agent: usize, action: usize },

    #[error("exact MPD needs {profiles} opponent profiles, above the cap of {cap}")]
    EnumerationTooLarge { profiles: u128, cap: u128 },

    #[error("integration diverged; last finite state at t = {last_time}")]
    IntegrationDiverged { last_time: f64 },

    #[error("QRE iteration did not converge after {iterations} sweeps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::IntegrationDiverged { .. }
                | Error::NoConvergence { .. }
                | Error::InfiniteDivergence { .. }
                | Error::EnumerationTooLarge { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
