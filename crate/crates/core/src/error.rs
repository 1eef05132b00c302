use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("unsupported dimension {0}: only S^1 and S^2 are supported")]
    UnsupportedDimension(usize),

    #[error("resolution out of range: {0}")]
    Resolution(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("radial function must be positive, got {value} at point {index}")]
    NonPositiveRadius { index: usize, value: f64 },

    #[error("point outside the shape domain: {0}")]
    OutsideDomain(String),

    #[error("zero tangent vector")]
    ZeroTangent,

    #[error("invalid shape: {0}")]
    InvalidShape(String),

    #[error("invalid problem: {0}")]
    InvalidProblem(String),

    #[error("iterate must be positive, got {value} at point {index}")]
    NonPositiveIterate { index: usize, value: f64 },

    #[error("hypothesis violated: {0}")]
    HypothesisViolated(String),

    #[error("continuation step underflow at t = {t} (step {step:e})")]
    StepUnderflow { t: f64, step: f64 },

    #[error("source density is identically zero")]
    ZeroDensity,

    #[error("density value {value} exceeds its rejection bound {bound}")]
    DensityBound { value: f64, bound: f64 },

    #[error("degenerate binning: {0}")]
    Binning(String),

    #[error("empty ray batch")]
    EmptyBatch,

    #[error("inversion of the reflection map did not converge near {0:?}")]
    Inversion([f64; 3]),

    #[error("check failed: {0}")]
    CheckFailed(String),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
