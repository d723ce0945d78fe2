use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("S-matrix evaluated at its pole (|omega - z_R| = {distance:e})")]
    PoleEvaluation { distance: f64 },

    #[error("contour differentiation did not converge with {nodes} nodes")]
    NoConvergence { nodes: usize },

    #[error("index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("negative time {0}: evolution is only defined for t >= 0")]
    NegativeTime(f64),

    #[error("operation requires the {expected} representation")]
    WrongRepresentation { expected: &'static str },

    #[error("grid is empty")]
    EmptyGrid,

    #[error("invalid config: {0}")]
    ConfigInvalid(String),

    #[error("j = {j} exceeds the certification cap of {cap}")]
    JTooLarge { j: usize, cap: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
