use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("model file: {0}")]
    Parse(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("invalid model: {0}")]
    InvalidSpec(String),

    #[error("no feasible tilt found (best margin {best_margin:.6e}); the negative-drift condition may fail or the search box is too small")]
    NoFeasibleTilt { best_margin: f64 },

    #[error("infeasible tilt ({0})")]
    InfeasibleTilt(String),

    #[error("truncation level must be at least 1, got {0}")]
    TruncationLevel(usize),

    #[error("rate matrix iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    RateMatrixNotConverged { iterations: usize, residual: f64 },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("window {m1}x{m2} needs {bytes} bytes, above the {limit} byte guard; use a smaller window")]
    WindowTooLarge {
        m1: usize,
        m2: usize,
        bytes: usize,
        limit: usize,
    },

    #[error("chain is periodic (period {0})")]
    Periodic(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
