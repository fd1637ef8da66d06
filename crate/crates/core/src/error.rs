use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("point budget exceeded: {requested} points requested, limit is {limit}")]
    ResourceLimit { requested: u128, limit: usize },

    #[error("covariance is not positive definite (Cholesky failed after jitter)")]
    SingularCovariance,

    #[error("kernel matrix is ill-conditioned: {0}")]
    IllConditionedKernel(String),

    #[error("non-finite function value at sigma-point {index}")]
    NonFiniteEvaluation { index: usize },

    #[error("negative variance {0:e} beyond round-off tolerance")]
    NegativeVariance(f64),

    #[error("innovation covariance is not positive definite")]
    SingularInnovation,

    #[error("degenerate ensemble: {0}")]
    DegenerateEnsemble(String),

    #[error("step {step}: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn at_step(self, step: usize) -> Self {
        match self {
            e @ Error::Step { .. } => e,
            e => Error::Step {
                step,
                source: Box::new(e),
            },
        }
    }

    /// Innermost error, with any step annotations removed.
    pub fn root(&self) -> &Error {
        match self {
            Error::Step { source, .. } => source.root(),
            e => e,
        }
    }

    /// True for failures that come from the numerics rather than from bad input.
    pub fn is_numerical(&self) -> bool {
        !matches!(
            self.root(),
            Error::InvalidParameter(_) | Error::DimensionMismatch(_) | Error::ResourceLimit { .. }
        )
    }
}
