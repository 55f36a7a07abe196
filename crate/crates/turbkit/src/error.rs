use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum TurbError {
    #[error("bad grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("forcing shell [{lo}, {hi}] not inside the dealiased band (max {max})")]
    InvalidShell { lo: i64, hi: i64, max: i64 },

    #[error("CFL violation at t = {t}: u_max = {u_max}, dt = {dt} exceeds limit {limit}")]
    CflViolation {
        t: f64,
        u_max: f64,
        dt: f64,
        limit: f64,
    },

    #[error("solution diverged (non-finite energy) at t = {t}")]
    Diverged { t: f64 },

    #[error("snapshot has no pressure field")]
    MissingPressure,

    #[error("checkpoint: {0}")]
    BadCheckpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, TurbError>;
