use thiserror::Error;

/// Errors raised by the analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// Malformed or inconsistent input (shapes, non-finite entries, out-of-range parameters).
    #[error("input error: {0}")]
    Input(String),
    /// A numerical routine failed to converge or produced inconsistent results.
    #[error("numeric error: {0}")]
    Numeric(String),
    /// The target vector is not a nonnegative combination of the generators.
    #[error("target is not in the cone generated by the columns")]
    NotInCone,
    /// No admissible sparsity level exists for the system.
    #[error("no feasible sparsity: N - rank(A) = {deficiency} exceeds m = {inputs}")]
    NoFeasibleSparsity { deficiency: usize, inputs: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn input(msg: impl Into<String>) -> Self {
        Error::Input(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }
}
