use alloc::string::String;

/// Errors raised by the simulation core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A caller-supplied parameter violates an operation's precondition.
    #[error("invalid argument `{name}`: {reason}")]
    InvalidArgument { name: &'static str, reason: String },

    /// A site that must be interior (drive point, streamline seed) is not.
    #[error("site ({i}, {j}) is not an interior site")]
    NotInterior { i: i64, j: i64 },

    /// Factorization met a vanishing pivot, e.g. a lossless network driven
    /// exactly on one of its resonances.
    #[error("singular or near-singular system (pivot {pivot} at row {row})")]
    Singular { row: usize, pivot: f64 },

    /// The linear solve could not meet its residual contract.
    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    /// An iterative method stopped before meeting its tolerance.
    #[error("{what} did not converge after {iterations} iterations")]
    NotConverged { what: &'static str, iterations: usize },

    /// A quantity needed for normalization is zero (empty or zero field).
    #[error("degenerate input: {0}")]
    Degenerate(&'static str),

    /// Damping length or quality factor requested for a lossless circuit.
    #[error("no damping: resistance is zero")]
    NoDamping,
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidArgument {
        name,
        reason: reason.into(),
    }
}
