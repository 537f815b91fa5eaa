use thiserror::Error;

/// Errors raised by the analysis and simulation routines.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("assumption violated: {0}")]
    AssumptionViolated(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("infeasible design: {0}")]
    InfeasibleDesign(String),

    #[error("regulator equations unsolvable (residual {residual:.3e})")]
    Unsolvable { residual: f64 },

    #[error("spectrum is not purely imaginary: {0}")]
    WrongSpectrum(String),

    #[error("trigger function has no exponential envelope")]
    UnsupportedEnvelope,

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
