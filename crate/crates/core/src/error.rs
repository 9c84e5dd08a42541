use thiserror::Error;

use crate::oracle::ElementSet;

#[derive(Debug, Error)]
pub enum Error {
    #[error("ground set of size {n} exceeds the exhaustive limit {limit}")]
    GroundSetTooLarge { n: usize, limit: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("input set {0:?} is not independent")]
    NotIndependentInput(ElementSet),

    #[error("operation requires K = {expected}, got K = {got}")]
    WrongK { expected: usize, got: usize },

    #[error("distribution `{distribution}` is incompatible with a {instance} instance")]
    IncompatibleDistribution { distribution: String, instance: String },

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// A query the access policy refused to answer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PolicyViolation {
    #[error("weak oracle: {set:?} is infeasible")]
    Infeasible { set: ElementSet },

    #[error("element store: {set:?} is outside the stored set plus arrival")]
    OutsideWindow { set: ElementSet },
}
