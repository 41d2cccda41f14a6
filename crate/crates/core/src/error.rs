use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// Cholesky pivot was not positive. With `lambda > 0` this only happens
    /// when the stored history is corrupt (NaN feedback, broken counts, ...).
    #[error("matrix not numerically positive definite at pivot {pivot}")]
    NotPositiveDefinite { pivot: usize },

    #[error("posterior variance {value} is negative beyond tolerance")]
    NegativeVariance { value: f64 },

    #[error("candidate index {index} out of range for {len} candidates")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("empty candidate set")]
    EmptyCandidateSet,
}

impl Error {
    pub(crate) fn config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }
}
