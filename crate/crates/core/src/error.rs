use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("pumping requested with n_max_photons = 0: no Fock level to pump into")]
    NoRoomToPump,

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("rung {rung} out of range (highest rung is {max})")]
    RungOutOfRange { rung: usize, max: usize },

    #[error("trace {trace} deviates from 1 by more than {tol:e}")]
    TraceDeviation { trace: f64, tol: f64 },

    #[error("invalid integration spec: {0}")]
    InvalidSpec(String),

    #[error("step size underflow at t = {t}")]
    StepUnderflow { t: f64 },

    #[error("non-finite value in right-hand side at t = {t}")]
    NonFinite { t: f64 },

    #[error("truncation inadequate: top-rung population {population:e} at t = {t}")]
    CutoffViolation { t: f64, population: f64 },

    #[error("correlation undefined (constant series)")]
    ConstantSeries,

    #[error("series lengths differ or are too short ({0} vs {1})")]
    LengthMismatch(usize, usize),

    #[error("trajectories are sampled on different time grids")]
    TimeGridMismatch,

    #[error("matrix is not positive semidefinite (eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("steady state null space is not one-dimensional (singular values {smallest:e}, {next:e})")]
    DegenerateNullSpace { smallest: f64, next: f64 },

    #[error("no bounded steady state for pump {pump} >= kappa {kappa}")]
    UnboundedGain { pump: f64, kappa: f64 },

    #[error("did not converge: {0}")]
    NotConverged(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error at {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Config,
    Numerical,
    Io,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Config(_) | Error::InvalidParams(_) | Error::InvalidSpec(_) | Error::NoRoomToPump => {
                ErrorCategory::Config
            }
            Error::Io { .. } => ErrorCategory::Io,
            _ => ErrorCategory::Numerical,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
