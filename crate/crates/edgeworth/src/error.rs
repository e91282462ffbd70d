//! Error type shared by all modules.

/// Errors produced by the numerical and combinatorial routines.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An index or order argument is outside its supported range.
    #[error("out of range: {0}")]
    Bounds(String),

    /// A caller supplied fewer derivative values than the requested order needs.
    #[error("insufficient data: {0}")]
    Arity(String),

    /// A stated precondition does not hold for the given arguments.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A quadrature, root-finding or branch-tracking step failed to converge.
    #[error("numeric failure: {0}")]
    Numeric(String),

    /// An experiment configuration is inconsistent or cannot be satisfied.
    #[error("configuration error: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
