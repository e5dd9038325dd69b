use thiserror::Error;

/// Errors reported by the solver and its building blocks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("sparsity {k} out of range 1..={n}")]
    InvalidSparsity { k: usize, n: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("factor matrix has no nonzero rows")]
    ZeroMatrix,

    #[error("matrix is not symmetric (max asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:e} below {threshold:e})")]
    NotPositiveSemidefinite { eigenvalue: f64, threshold: f64 },

    #[error("rank exceeds {rank} (eigenvalue {eigenvalue:e} above {threshold:e})")]
    RankExceeded {
        rank: usize,
        eigenvalue: f64,
        threshold: f64,
    },

    #[error("algorithm {algorithm} requires rank 2, instance has rank {rank}")]
    AlgorithmMismatch { algorithm: &'static str, rank: usize },

    #[error("exhaustive search over C({n},{k}) = {count} supports exceeds cap {cap}")]
    OracleCapExceeded { n: usize, k: usize, count: u128, cap: u128 },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-readable name of the error kind.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidSparsity { .. } => "invalid_sparsity",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::ZeroMatrix => "zero_matrix",
            Error::NotSymmetric { .. } => "not_symmetric",
            Error::NotPositiveSemidefinite { .. } => "not_psd",
            Error::RankExceeded { .. } => "rank_exceeded",
            Error::AlgorithmMismatch { .. } => "algorithm_mismatch",
            Error::OracleCapExceeded { .. } => "oracle_cap_exceeded",
            Error::InvalidInput(_) => "invalid_input",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
