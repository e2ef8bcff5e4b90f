use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("empty artefact has no coordinates")]
    EmptyArtefact,

    #[error("artefact has {got} coordinates, space has {expected} dimensions")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("coordinate {value} out of range [0, {rho}]")]
    CoordinateOutOfRange { value: u32, rho: u32 },

    #[error("space too large to enumerate ({size} points, cap {cap})")]
    SpaceTooLarge { size: u128, cap: u128 },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("configuration length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("insufficient tail points: {got} distinct degrees >= k_min, need {need}")]
    InsufficientTail { got: usize, need: usize },

    #[error("agents do not share an identical internal configuration")]
    InternalMismatch,

    #[error("graph file: {0}")]
    GraphFile(String),

    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidConfig(msg.into())
}
