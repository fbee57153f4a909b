use thiserror::Error;

use crate::lp::LpError;
use crate::network::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("failed to read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed input: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("network failed validation:\n{0}")]
    Invalid(ValidationReport),

    #[error("network is disconnected; unreachable buses: {}", .0.join(", "))]
    Disconnected(Vec<String>),

    #[error("unknown {kind} '{id}'")]
    UnknownElement { kind: &'static str, id: String },

    #[error("nodal injections do not balance (net {0} MW)")]
    Unbalanced(f64),

    #[error(transparent)]
    Lp(#[from] LpError),

    #[error("{rate} is undefined: {reason}")]
    UndefinedRate { rate: &'static str, reason: String },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("storage schedule violation: {0}")]
    Schedule(String),

    #[error("no marginal rate available for {kind} '{id}' in period {period}")]
    MissingRate {
        kind: &'static str,
        id: String,
        period: usize,
    },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True when the failure is an LP infeasibility (as opposed to bad input).
    pub fn is_infeasible(&self) -> bool {
        matches!(self, Error::Lp(LpError::Infeasible { .. }))
    }
}
