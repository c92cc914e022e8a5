use thiserror::Error;

/// Errors raised by model construction, sampling and evaluation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("value {value} is outside the domain: {reason}")]
    Domain { value: f64, reason: String },

    #[error("sampler produced a vector with every component equal to -inf")]
    AllNegInfinite,

    #[error("generator draw violates max(S) = 0 (max = {max})")]
    GeneratorInvariant { max: f64 },

    #[error("tilting bound exceeded: max(U) = {observed} > q_max = {q_max}")]
    TiltBoundExceeded { observed: f64, q_max: f64 },

    #[error("coordinate {coordinate} was never finite in {draws} draws")]
    NoFiniteMass { coordinate: usize, draws: usize },

    #[error("threshold too extreme: {accepted} of {budget} draws accepted")]
    TooExtremeThreshold { accepted: usize, budget: usize },

    #[error("no Lebesgue density: {0}")]
    NoDensity(String),

    #[error("quadrature did not converge: estimate {value}, error estimate {abs_err}")]
    Quadrature { value: f64, abs_err: f64 },

    #[error("region is not bounded away from -inf")]
    UnboundedRegion,

    #[error("regions overlap at probe point {0:?}")]
    RegionOverlap(Vec<f64>),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("singular matrix: {0}")]
    Singular(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
