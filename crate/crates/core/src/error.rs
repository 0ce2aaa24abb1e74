use thiserror::Error;

/// Errors raised by the geometry, integrand and integration routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum LevyError {
    /// An argument lies outside the domain of a formula.
    #[error("domain error in {op}: {detail}")]
    Domain { op: &'static str, detail: String },

    /// Input sits on a measure-zero locus (b in {0, 1}, a region boundary)
    /// where the fundamental domain is not constructed.
    #[error("degenerate input: {0}")]
    Degenerate(String),

    /// A denominator that must be nonzero vanished.
    #[error("singular input in {0}")]
    Singular(&'static str),

    /// The evaluation budget ran out before the tolerance was met.
    #[error("budget exceeded after {evaluations} evaluations: best {value} +/- {error_estimate}")]
    BudgetExceeded {
        value: f64,
        error_estimate: f64,
        evaluations: u64,
    },

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T, E = LevyError> = std::result::Result<T, E>;

pub(crate) fn domain(op: &'static str, detail: impl Into<String>) -> LevyError {
    LevyError::Domain {
        op,
        detail: detail.into(),
    }
}
