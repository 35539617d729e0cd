use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EpsError {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("integration step {step} (t = {time}) produced a non-finite state")]
    Step { step: usize, time: f64 },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("derivation error: {0}")]
    Derivation(String),

    #[error("grid error: {0}")]
    Grid(String),

    #[error("caustic: |sin(omega' * dt)| = {sin_abs:e} for dt = {dt}")]
    Caustic { dt: f64, sin_abs: f64 },

    #[error("horizon exceeded at t = {time}: {reason}")]
    Horizon { time: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, EpsError>;
