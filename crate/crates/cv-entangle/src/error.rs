use thiserror::Error;

/// Error type shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("conflicting parameters: {0}")]
    Conflict(String),

    #[error("structural error: {0}")]
    Structural(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("convergence failure: {reason}; trace (bins, horizon, e_n): {trace:?}")]
    Convergence {
        reason: String,
        trace: Vec<(usize, f64, f64)>,
    },

    #[error("numerical degeneracy: {0}")]
    Degenerate(String),

    #[error("no entanglement present: {0}")]
    NoEntanglement(String),

    #[error("ambiguous roots in (0,1): {0:?}")]
    AmbiguousRoots(Vec<f64>),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
