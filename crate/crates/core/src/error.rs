use thiserror::Error;

/// Errors shared across the solver library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum RsError {
    /// A quantity outside the curve's domain was supplied.
    #[error("quantity {0} is outside the curve domain (q >= 0 required)")]
    DomainError(f64),

    /// A level search was requested for a value the curve never attains.
    #[error("curve never attains level {0} on the searched domain")]
    NoCrossing(f64),

    /// The input violates a standing model assumption.
    #[error("model assumption violated: {0}")]
    ModelAssumption(String),

    /// A structurally invalid argument (empty coalition, length mismatch, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Random instance construction exhausted its resampling budget.
    #[error("instance generation failed after {0} attempts")]
    GenerationExhausted(usize),

    /// A retailer with a zero optimal order cannot be mapped to a price.
    #[error("retailer {0} has a zero optimal order; no per-unit price reproduces its payoff")]
    DegenerateRetailer(usize),

    /// An allocation failed a core membership check it was required to pass.
    #[error("allocation is not a core member: {0}")]
    NotInCore(String),

    /// A price vector violates a coalition bound.
    #[error("price vector violates the bound for coalition {{{0}}}")]
    PriceBoundViolation(String),

    /// Exhaustive enumeration refused for too many players.
    #[error("player count {0} exceeds the exhaustive-enumeration cap of {1}")]
    PlayerCapExceeded(usize, usize),
}

pub type Result<T> = std::result::Result<T, RsError>;
