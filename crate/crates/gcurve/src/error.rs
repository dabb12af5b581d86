//! Crate-wide error type and exit-code mapping.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("source must be non-negative: {context} has value {value} at {location}")]
    NegativeSource {
        context: String,
        location: String,
        value: f64,
    },

    #[error("wind does not vanish on the zero set of the source: |W| = {wind_norm} at {location}")]
    AubryWindMismatch { location: String, wind_norm: f64 },

    #[error("problem is flagged ergodic but its Aubry set is empty (tolerance {tol})")]
    EmptyAubry { tol: f64 },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("time step {dt} exceeds the stability bound {bound}")]
    CflViolation { dt: f64, bound: f64 },

    #[error("solution diverged at t = {time}: max |u| = {max_abs} exceeds {threshold}")]
    Diverged {
        time: f64,
        max_abs: f64,
        threshold: f64,
    },

    #[error("grid too coarse for the requested step: max speed * dt = {speed_dt} > 5h = {limit}")]
    GridTooCoarse { speed_dt: f64, limit: f64 },

    #[error("trajectory violates the velocity cone")]
    InadmissibleTrajectory,

    #[error("value table has not stabilized on the Aubry set: oscillation {osc} > tolerance {tol}")]
    NotStabilized { osc: f64, tol: f64 },

    #[error("time series too short: covers {have} windows, need at least {need}")]
    InsufficientHorizon { have: usize, need: usize },

    #[error("check requires a wind-free problem but max |W| = {max_wind}")]
    WindNotZero { max_wind: f64 },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{field}: {message}")]
    Validation { field: String, message: String },

    #[error("expression error: {0}")]
    Expr(String),

    #[error("verification failed: {failed} of {total} checks")]
    VerificationFailed { failed: usize, total: usize },

    #[error("output directory is locked by another run: {0}")]
    LockHeld(PathBuf),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Process exit code for the CLI: 0 ok, 2 config, 3 numerical, 4 verification.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Parse { .. } | Error::Validation { .. } | Error::Expr(_) => 2,
            Error::NegativeSource { .. }
            | Error::AubryWindMismatch { .. }
            | Error::EmptyAubry { .. } => 2,
            Error::CflViolation { .. }
            | Error::Diverged { .. }
            | Error::GridTooCoarse { .. }
            | Error::Domain(_)
            | Error::InadmissibleTrajectory
            | Error::NotStabilized { .. }
            | Error::InsufficientHorizon { .. }
            | Error::WindNotZero { .. } => 3,
            Error::VerificationFailed { .. } => 4,
            Error::LockHeld(_) | Error::Io(_) => 1,
        }
    }
}
