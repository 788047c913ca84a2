//! Error type shared across the library.

/// Errors produced by the library.
///
/// Dimension mismatches between symmetric matrices are treated as programming
/// errors and panic (as in nalgebra); the variants here cover data-dependent
/// failures that a caller can reasonably recover from.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// A coordinate vector whose length is not m(m+1)/2 for any m.
    #[error("vector of length {0} is not a packed symmetric triangle")]
    NotTriangular(usize),

    /// A parameter violated its documented range (e.g. a nonpositive penalty).
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// NaN or infinity where a finite value is required.
    #[error("non-finite values in {0}")]
    NonFinite(&'static str),

    /// Cholesky factorization failed; the operator is not positive definite.
    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    /// The symmetric eigendecomposition did not converge.
    #[error("eigendecomposition did not converge")]
    EigenFailed,

    /// Backtracking line search shrank the step below the configured minimum.
    #[error("line search failed: step fell below the minimum")]
    LineSearchFailed,

    /// The alternating-projections oracle hit its sweep limit.
    #[error("nearest-correlation oracle did not converge within {0} sweeps")]
    OracleStalled(usize),

    /// An input matrix failed validation (shape, symmetry, diagonal, ...).
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),

    /// A CSV cell could not be parsed; positions are 1-based.
    #[error("csv parse error at row {row}, column {col}: {msg}")]
    CsvParse {
        /// 1-based row of the offending cell.
        row: usize,
        /// 1-based column of the offending cell.
        col: usize,
        /// What went wrong.
        msg: String,
    },
}
