use thiserror::Error;

/// Errors raised by the contest-design kernels.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("value {value} outside the admissible range [{lo}, {hi}]")]
    Range { value: f64, lo: f64, hi: f64 },

    #[error("policy is trivial (all shares equal); no equilibrium is defined")]
    TrivialPolicy,

    #[error("order violation: share {index} exceeds share {prev}", prev = .index - 1)]
    OrderViolation { index: usize },

    #[error("shares sum to {sum}, expected 1")]
    Normalization { sum: f64 },

    #[error("parse error at field {field} (offset {offset}): {message}")]
    Parse {
        field: usize,
        offset: usize,
        message: String,
    },

    #[error("reduced objective requires a zero last share, got {last_share}")]
    ReductionPrecondition { last_share: f64 },

    #[error("two-level family degenerates to HM for n = 2")]
    DegenerateFamily,

    #[error("structure theorem unavailable: {0}")]
    StructureUnavailable(String),

    #[error("budget exceeded: {0}")]
    Budget(String),

    #[error("precision: {0}")]
    Precision(String),
}

pub type Result<T> = std::result::Result<T, Error>;
