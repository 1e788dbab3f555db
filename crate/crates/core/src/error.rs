use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("length mismatch: {left} inputs vs {right} targets")]
    LengthMismatch { left: usize, right: usize },

    #[error("cholesky factorization failed (n = {size}, last jitter = {jitter:e})")]
    Factorization { size: usize, jitter: f64 },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("domain is empty")]
    EmptyDomain,

    #[error("point {point:?} lies outside the domain")]
    OutOfDomain { point: Vec<f64> },

    #[error("no admissible hyperparameter candidate")]
    NoCandidate,

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }

    pub fn at_step(self, step: usize) -> Self {
        Error::Step {
            step,
            source: Box::new(self),
        }
    }

    /// True for failures of the numerical linear algebra rather than bad input.
    pub fn is_numerical(&self) -> bool {
        match self {
            Error::Factorization { .. } | Error::NoCandidate => true,
            Error::Step { source, .. } => source.is_numerical(),
            _ => false,
        }
    }
}
