use alloc::string::String;

pub type Result<T, E = FpError> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FpError {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("term {index} is outside the domain of its outer function")]
    Domain { index: usize },

    #[error("matrix is ill-conditioned (condition number {0:e})")]
    IllConditioned(f64),

    #[error("matrix is not positive semidefinite (smallest eigenvalue {0:e})")]
    NotPsd(f64),

    #[error("starting point is infeasible or outside the open domain")]
    InvalidStart,

    #[error("objective decreased from {previous} to {current} at outer iteration {iteration}")]
    MonotonicityViolated {
        iteration: usize,
        previous: f64,
        current: f64,
    },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("refused: {0}")]
    Refused(String),
}

impl FpError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        FpError::InvalidInput(msg.into())
    }

    /// True for errors that signal a bug rather than bad input.
    pub fn is_invariant_violation(&self) -> bool {
        matches!(
            self,
            FpError::MonotonicityViolated { .. } | FpError::Invariant(_)
        )
    }
}
