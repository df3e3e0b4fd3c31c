use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecayError {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("argument outside the domain of the function: {0}")]
    Domain(String),

    #[error("operation not supported for this input: {0}")]
    Unsupported(String),

    #[error("moment of the spectral density diverges: {0}")]
    DivergentMoment(String),

    #[error("quadrature did not reach tolerance {requested:e} (estimate {achieved:e}) near {location:e}")]
    Quadrature {
        requested: f64,
        achieved: f64,
        location: f64,
    },

    #[error("iteration did not converge after {iterations} steps (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("outside the weak-coupling regime: {0}")]
    OutOfRegime(String),

    #[error("initial level has zero width; it does not decay")]
    StableState,

    #[error("time step {step:e} exceeds the resolution bound {bound:e}")]
    StepTooCoarse { step: f64, bound: f64 },

    #[error("asymptotic regime not reached: {0}")]
    RegimeNotReached(String),
}

pub type Result<T> = std::result::Result<T, DecayError>;
