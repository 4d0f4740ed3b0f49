//! Library error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("point has {got} coordinates, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("vector of length {got} does not match expected length {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("basis dimension overflows for d={d}, n={n}")]
    BasisTooLarge { d: usize, n: usize },

    #[error("nonfinite coordinate in point set")]
    NonFinitePoint,

    #[error("weight table contains phi = -inf or NaN (w must be finite)")]
    InvalidWeight,

    #[error("invalid measure weights: {0}")]
    InvalidMeasure(String),

    #[error("measure is degenerate on polynomials of degree {degree}")]
    DegenerateMeasure { degree: usize },

    #[error("interpolation nodes are singular for the requested degree")]
    SingularNodes,

    #[error("candidate set is not admissible: {0}")]
    Admissibility(String),

    #[error("{subsets} subsets exceed the brute-force budget of {budget}")]
    ScaleGuard { subsets: u128, budget: u128 },

    #[error("every remaining candidate yields a zero pivot")]
    DegenerateFamily,

    #[error("quantity undefined at degree 0 (degree sum m_n = 0)")]
    ZeroDegreeSum,

    #[error("curve is missing a symmetric stencil around t = 0")]
    MissingStencil,

    #[error("need at least three finite samples on an equally spaced grid")]
    InsufficientCurve,

    #[error("unsupported reference measure `{0}`")]
    UnsupportedReference(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("malformed field: {0}")]
    Parse(String),
}
