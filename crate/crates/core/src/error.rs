use thiserror::Error;

/// Errors surfaced by the solvers and validators in this crate.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// Malformed instance, norm, or parameter.
    #[error("invalid input: {0}")]
    InvalidInput(String),
    /// A solution does not respect its instance.
    #[error("invalid solution: {0}")]
    InvalidSolution(String),
    /// The instance (or the requested guess) admits no feasible solution.
    #[error("infeasible: {0}")]
    Infeasible(String),
    /// An explicit enumeration or iteration cap was hit.
    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),
    /// Numerical failure inside the LP machinery.
    #[error("solver error: {0}")]
    Solver(String),
    /// A caller violated a documented precondition.
    #[error("contract violated: {0}")]
    Contract(String),
    /// An invariant that should hold by construction failed.
    #[error("internal error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;

macro_rules! invalid {
    ($($arg:tt)*) => { $crate::error::Error::InvalidInput(format!($($arg)*)) };
}

macro_rules! internal {
    ($($arg:tt)*) => { $crate::error::Error::Internal(format!($($arg)*)) };
}

pub(crate) use internal;
pub(crate) use invalid;
