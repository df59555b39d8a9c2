use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: left operand is {left}x{left}, right operand is {right}x{right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("matrix dimension must be at least 1")]
    EmptyMatrix,

    #[error("expected {expected} entries for a {dim}x{dim} matrix, got {got}")]
    EntryCount {
        dim: usize,
        expected: usize,
        got: usize,
    },

    #[error("matrix entry ({row}, {col}) is not finite")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian: max |h - h*| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {residual:e})")]
    NoConvergence { sweeps: usize, residual: f64 },

    #[error("eigenvalue {eigenvalue:e} lies outside the domain [0, inf) of the scalar map")]
    Domain { eigenvalue: f64 },

    #[error("unknown scalar map `{0}`")]
    UnknownMap(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("could not bracket f^-1({y:e}): map does not reach it within 2^64 growth")]
    Bracket { y: f64 },

    #[error("scalar map `{map}` lacks a required property: {missing}")]
    Hypothesis { map: String, missing: String },

    #[error("operator tuple must contain at least one operator")]
    EmptyTuple,

    #[error("unknown bound id `{0}`")]
    UnknownBound(String),

    #[error("json: {0}")]
    Json(String),
}

pub type Result<T> = std::result::Result<T, Error>;
