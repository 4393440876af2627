use thiserror::Error;

/// Errors raised by the hypergrid toolkit.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An operation's precondition does not hold for the given input.
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// The input is too large for an exhaustive or exact computation.
    #[error("size guard exceeded: {what} is {actual}, limit {limit}")]
    Guard {
        what: &'static str,
        actual: u128,
        limit: u128,
    },

    /// Malformed input (bad point, bad edge, bad chain, ...).
    #[error("invalid input: {0}")]
    Invalid(String),

    /// A flow value came out negative; only possible for non-log-concave input.
    #[error("negative collapsed flow value on edge {edge} at level {level}")]
    NegativeFlow { edge: String, level: i64 },

    /// The solver cannot reach the requested mean.
    #[error("unattainable tilt target: {0}")]
    Unattainable(String),

    /// Adaptive quadrature failed to reach its tolerance.
    #[error("quadrature did not converge: {0}")]
    Quadrature(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn guard(what: &'static str, actual: u128, limit: u128) -> Result<()> {
    if actual > limit {
        Err(Error::Guard {
            what,
            actual,
            limit,
        })
    } else {
        Ok(())
    }
}
