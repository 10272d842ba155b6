use thiserror::Error;

#[derive(Debug, Error)]
pub enum NlsError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("soliton too close to the boundary: {0}")]
    BoundaryProximity(String),

    #[error("no convergence after {iterations} iterations (residual {residual:.3e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("incompatible source: kernel projection {projection:.3e} exceeds {tolerance:.3e}")]
    IncompatibleSource { projection: f64, tolerance: f64 },

    #[error("second order undefined for m<3 (m = {0})")]
    SecondOrderUndefined(f64),

    #[error("non-finite value at step {step}")]
    NonFinite { step: usize },

    #[error("invariant drift {drift:.3e} at t = {t:.4} exceeds {limit:.1e}; reduce dt")]
    InvariantDrift { t: f64, drift: f64, limit: f64 },

    #[error("fit lost lock: {reason} (residual {residual:.3e})")]
    LostLock { reason: String, residual: f64 },

    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },

    #[error("bad snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, NlsError>;
