use alloc::string::String;

/// Errors produced by the core routines.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A parameter is outside its documented domain.
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    /// The request exceeds a memory or size cap.
    #[error("capacity exceeded: {what} = {requested} exceeds limit {limit}")]
    Capacity {
        what: &'static str,
        requested: usize,
        limit: usize,
    },

    /// Fewer moments were supplied than the operation needs.
    #[error("need moments up to order {needed}, only {available} available")]
    MissingMoments { needed: usize, available: usize },

    /// A moment overflowed or became non-finite.
    #[error("moment of order {order} overflowed; rescale the operator")]
    MomentOverflow { order: usize },

    /// A shot allocation cannot be formed because a moment vanishes while
    /// its variance does not.
    #[error("moment of order {order} is zero but has variance {variance}")]
    ZeroMoment { order: usize, variance: f64 },

    /// A decomposition was requested outside the hypothesis of its bound.
    #[error("hypothesis `{bound}` violated")]
    Hypothesis { bound: &'static str },

    /// Not enough usable data points for a fit.
    #[error("fit needs at least {needed} usable points, got {got}")]
    InsufficientPoints { needed: usize, got: usize },

    /// An iterative eigensolver did not reach its tolerance.
    #[error("eigensolver did not converge: residual {residual:e} after {iterations} iterations")]
    NoConvergence { iterations: usize, residual: f64 },
}

impl Error {
    pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

/// Result alias for the crate.
pub type Result<T> = core::result::Result<T, Error>;
