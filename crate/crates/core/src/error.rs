use thiserror::Error;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("value overflows double precision (log-magnitude {log_magnitude:.1}); use the scaled form")]
    Overflow { log_magnitude: f64 },

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("point {0} lies within the pole guard of coth or tanh(sqrt)/sqrt")]
    PoleError(String),

    #[error("argument outside the admissible domain: {0}")]
    DomainError(String),

    #[error("Newton iteration did not converge after {iters} iterations (last residual {residual:.3e})")]
    NoConvergence { iters: usize, residual: f64 },

    #[error("a zero lies within {distance:.2e} of the contour")]
    ContourTooClose { distance: f64 },

    #[error("winding number did not stabilise: {0}")]
    ContourUnstable(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("singular 2x2 coupling system at s = {s}")]
    SingularSystem { s: f64 },

    #[error("grid too coarse: {0}")]
    ResolutionError(String),

    #[error("profile cannot satisfy the domain constraints (worst residual {residual:.3e})")]
    InfeasibleProfile { residual: f64 },

    #[error("linear solve failed: {0}")]
    SolveFailure(String),

    #[error("operation not defined for this boundary variant: {0}")]
    VariantError(String),

    #[error("invalid fit window: {0}")]
    WindowError(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
