use thiserror::Error;

/// Errors raised by the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("level index {n} out of range for a mode with {levels} levels")]
    LevelOutOfRange { n: usize, levels: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("closed-form ZZ is singular: {0}")]
    Pole(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("time {t} ns outside pulse domain [0, {total}] ns")]
    Domain { t: f64, total: f64 },

    #[error("propagator unitarity error {deviation:e} exceeds tolerance; reduce the time step (dt = {dt} ns)")]
    StepSize { deviation: f64, dt: f64 },

    #[error("logical frame is ambiguous: {0}")]
    Frame(String),

    #[error("{requested} branch is not valid here; use the {other} branch")]
    Branch { requested: &'static str, other: &'static str },

    #[error("calibration failed: {0}")]
    Calibration(String),
}

pub type Result<T> = std::result::Result<T, Error>;
