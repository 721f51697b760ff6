//! Error type shared by all modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GaborError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid mismatch: {0}")]
    GridMismatch(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("shift out of range: {0}")]
    ShiftOutOfRange(String),
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error("insufficient dynamic range: {0}")]
    InsufficientData(String),
    #[error("root finding failed: {0}")]
    RootFinding(String),
    #[error("frame is degenerate: {0}")]
    NotAFrame(String),
    #[error("lattice incompatible with grid: {0}")]
    LatticeMismatch(String),
    #[error("forward problem is ill-posed: {0}")]
    IllPosed(String),
    #[error("negative time: the fundamental solution is supported in t >= 0")]
    NegativeTime,
    #[error("iteration did not converge: {0}")]
    NoConvergence(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
}

pub type Result<T> = std::result::Result<T, GaborError>;
