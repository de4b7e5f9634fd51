use thiserror::Error;

/// Errors raised by the laboratory kernels and processes.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LabError {
    /// A size limit of an exact algorithm was exceeded.
    #[error("capacity exceeded for {what}: {got} > {limit}")]
    Capacity {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    /// A documented precondition of an operation does not hold.
    #[error("contract violation: {0}")]
    Contract(String),

    /// Fixed-width arithmetic cannot represent the result exactly.
    #[error("fixed-width overflow: {0}; use the big-integer path")]
    Overflow(String),

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// An assert-always property (a theorem) was found violated.
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, LabError>;

pub(crate) fn contract(msg: impl Into<String>) -> LabError {
    LabError::Contract(msg.into())
}

pub(crate) fn invariant(msg: impl Into<String>) -> LabError {
    LabError::Invariant(msg.into())
}
