use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not symmetric: entry ({row},{col}) differs from its transpose by {diff:e}")]
    NotSymmetric { row: usize, col: usize, diff: f64 },

    #[error("matrix is not positive definite: Cholesky pivot {pivot} is {value:e}")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error(
        "skewness matrix violates ||Delta a|| < 1 for all unit vectors a: \
         I_m - Delta'Delta is not positive definite (pivot {pivot} is {value:e})"
    )]
    InvalidSkewness { pivot: usize, value: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("point {0:?} lies outside the positive orthant")]
    OutOfSupport(Vec<f64>),

    #[error("unsupported operation: {0}")]
    Unsupported(String),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("location and scale of the two distributions differ: {0}")]
    MismatchedLocationScale(String),

    #[error("quadrature supports at most {max} dimensions, got {found}")]
    DimensionTooLarge { max: usize, found: usize },

    #[error("quadrature did not converge: error estimate {error:e} exceeds tolerance {tol:e}")]
    NonConvergent { error: f64, tol: f64 },

    #[error("densities have different supports")]
    SupportMismatch,

    #[error("{0}")]
    Parse(String),

    #[error("{0}")]
    Io(String),
}

impl Error {
    /// True for errors caused by malformed or invalid user input, as opposed
    /// to failures of a numerical routine on valid input.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::NotSquare { .. }
                | Error::NotSymmetric { .. }
                | Error::NotPositiveDefinite { .. }
                | Error::InvalidSkewness { .. }
                | Error::DimensionMismatch { .. }
                | Error::OutOfSupport(_)
                | Error::Unsupported(_)
                | Error::InvalidPartition(_)
                | Error::InvalidParameter(_)
                | Error::MismatchedLocationScale(_)
                | Error::DimensionTooLarge { .. }
                | Error::SupportMismatch
                | Error::Parse(_)
                | Error::Io(_)
        )
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
