use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("kind mismatch: cannot combine a step function with a piecewise-linear one")]
    KindMismatch,

    #[error("domain exceeds representation: [{lo}, {hi}] reaches an unused tail")]
    DomainExceedsRepresentation { lo: f64, hi: f64 },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid function: {0}")]
    InvalidFunction(String),

    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid enlargement: a_n must be positive and finite, got {0}")]
    InvalidEnlargement(f64),

    #[error("empty sample")]
    EmptySample,

    #[error("invalid sample: {0}")]
    InvalidSample(String),

    #[error("precondition violated for the {order} order: {reason}")]
    Precondition { order: &'static str, reason: String },

    #[error("epsilon must lie in [0, 0.5), got {0}")]
    InvalidEpsilon(f64),

    #[error("probability must lie in (0, 1), got {0}")]
    InvalidProbability(f64),

    #[error("unsupported combination: {0}")]
    UnsupportedCombination(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate index: the target functions coincide")]
    Degenerate,

    #[error("quadrature did not converge: {0}")]
    Quadrature(String),

    #[error("decision is not monotone in epsilon: {0}")]
    NonMonotone(String),
}

impl Error {
    /// Short machine-readable category, stable across releases.
    pub fn category(&self) -> &'static str {
        match self {
            Error::KindMismatch => "kind_mismatch",
            Error::DomainExceedsRepresentation { .. } => "domain_exceeds_representation",
            Error::InvalidGrid(_) | Error::InvalidFunction(_) | Error::InvalidDomain(_) => {
                "invalid_function"
            }
            Error::InvalidEnlargement(_) => "invalid_enlargement",
            Error::EmptySample | Error::InvalidSample(_) => "invalid_sample",
            Error::Precondition { .. } => "precondition",
            Error::InvalidEpsilon(_) | Error::InvalidProbability(_) | Error::InvalidParameter(_) => {
                "invalid_parameter"
            }
            Error::UnsupportedCombination(_) => "unsupported_combination",
            Error::Degenerate => "degenerate",
            Error::Quadrature(_) => "quadrature",
            Error::NonMonotone(_) => "non_monotone",
        }
    }
}
