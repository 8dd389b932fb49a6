use thiserror::Error;

/// Errors raised by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("radius {0} lies outside the unit interval")]
    RadiusOutOfRange(f64),

    #[error("binomial coefficient C({n}, {k}) overflows 128-bit integers")]
    BinomialOverflow { n: u32, k: u32 },

    #[error("truncation order must be positive")]
    ZeroOrder,

    #[error("no triangular block for |j| = {j_abs} at truncation order {order}")]
    BlockOutOfRange { j_abs: usize, order: usize },

    #[error("prefix length {q} exceeds data vector length {len}")]
    PrefixTooLong { q: usize, len: usize },

    #[error("truncation index {p} outside 1..={max}")]
    TruncationOutOfRange { p: usize, max: usize },

    #[error("order mismatch: expected M = {expected}, found M = {found}")]
    OrderMismatch { expected: usize, found: usize },

    #[error("invalid inclusion: {0}")]
    InvalidInclusion(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("numerical contract violated: {0}")]
    NumericalContract(String),

    #[error("malformed data: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
