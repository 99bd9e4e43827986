use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("density construction failed: {0}")]
    Construction(String),

    #[error("grid has {got} points, at least {min} required")]
    TooFewPoints { got: usize, min: usize },

    #[error("density integrates to {0}, cannot normalize")]
    NonPositiveMass(f64),

    #[error("degenerate variance {0}")]
    ZeroVariance(f64),

    #[error("score identity violated: |E[rho]| = {0:e}")]
    ScoreIdentity(f64),

    #[error("negative FFT ringing of mass {0:e} exceeds the resolution threshold")]
    Resolution(f64),

    #[error("effective support is disconnected ({0} separate blocks)")]
    DisconnectedSupport(usize),

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("family {0} has no score function")]
    NoScore(String),
}

pub type Result<T> = std::result::Result<T, Error>;
