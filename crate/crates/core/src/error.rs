use thiserror::Error;

/// Errors raised by the model formulas, the allocators and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the mathematical domain of the operation
    /// (nonpositive cost, non-finite value, singular derivative).
    #[error("domain error: {0}")]
    Domain(String),

    /// A budget or deposit floor is violated, or the wage discriminant is
    /// not positive.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The brute-force oracle was asked to enumerate more than its cap.
    #[error("instance too large for exhaustive enumeration: {0}")]
    Size(String),

    /// An internal invariant of an allocator did not hold.
    #[error("internal consistency violated: {0}")]
    Consistency(String),

    /// Invalid simulation or stream configuration.
    #[error("configuration error: {0}")]
    Config(String),

    /// A trace handed to the metrics collector is missing finalized tasks.
    #[error("incomplete trace: {0}")]
    IncompleteTrace(String),
}

pub type Result<T> = std::result::Result<T, Error>;
