use thiserror::Error;

/// Errors raised by the numerical core.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max asymmetry {asymmetry:.3e}, allowed {allowed:.3e})")]
    NonHermitian { asymmetry: f64, allowed: f64 },

    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid parameters: {0}")]
    BadParams(String),

    #[error("invalid Renyi order alpha = {0}")]
    BadAlpha(f64),

    #[error("total dimension {dimension} exceeds the limit {limit}")]
    TooLarge { dimension: u128, limit: u128 },

    #[error(
        "ambiguous energy blocking: energies {a} and {b} differ by {gap:.3e}, \
         within (tol, 10 tol] for tol = {tolerance:.3e}"
    )]
    AmbiguousBlocking {
        a: f64,
        b: f64,
        gap: f64,
        tolerance: f64,
    },

    #[error("state is not pure (purity {purity})")]
    NotPure { purity: f64 },

    #[error("state is not block diagonal in energy (off-block weight {off_block:.3e})")]
    NotBlockDiagonal { off_block: f64 },

    #[error("wrong system shape: {0}")]
    WrongSystemShape(String),

    #[error("quantum Fisher information {qfi} exceeds N^2 w0^2 = {max}")]
    QfiOutOfRange { qfi: f64, max: f64 },

    #[error("N = {n} is outside the verified range N <= {limit}")]
    RangeExceeded { n: usize, limit: usize },
}

pub type Result<T> = std::result::Result<T, Error>;
