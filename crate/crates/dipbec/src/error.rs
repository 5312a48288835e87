//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no stationary state from this guess")]
    NoStationaryState,

    #[error("solver did not converge: {0}")]
    NoConvergence(String),

    #[error("fold outside search bracket [{lo}, {hi}]")]
    FoldOutsideBracket { lo: f64, hi: f64 },

    #[error("quadrature did not converge (estimated error {err:.3e} above {tol:.3e})")]
    QuadratureNoConvergence { err: f64, tol: f64 },

    #[error("solution tracking lost at angle {phi:.6} (jump {jump:.3e} exceeds bound {bound:.3e})")]
    TrackingLoss { phi: f64, jump: f64, bound: f64 },

    #[error("step size underflow at t = {t:.6e}")]
    StepSizeUnderflow { t: f64 },

    #[error("energy drift {drift:.3e} exceeds tolerance {tol:.3e} at t = {t:.6e}")]
    EnergyDrift { t: f64, drift: f64, tol: f64 },

    #[error("energy {energy:.6e} below the accessible minimum {floor:.6e}: no states on the section")]
    EnergyBelowMinimum { energy: f64, floor: f64 },

    #[error("value out of representable range: {0}")]
    Range(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("config: {0}")]
    Config(String),
}

impl Error {
    pub fn invalid_input(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}
