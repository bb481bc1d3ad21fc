use thiserror::Error;

/// Errors raised by the spectral laboratory.
///
/// Variants are grouped so that front ends can map them onto stable exit
/// codes: see [`Error::class`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid operator: {0}")]
    InvalidOperator(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimMismatch { expected: usize, actual: usize },
    #[error("invalid window [{lo}, {hi}]")]
    InvalidWindow { lo: f64, hi: f64 },
    #[error("invalid time {0}: must be nonnegative")]
    InvalidTime(f64),
    #[error("operator is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },
    #[error("index {index} out of range 1..={len}")]
    InvalidIndex { index: usize, len: usize },
    #[error("invalid projection: {0}")]
    InvalidProjection(String),
    #[error("invalid partition: {0}")]
    InvalidPartition(String),
    #[error("graph is not connected")]
    NotConnected,
    #[error("graph too large for exact enumeration: {n} vertices (max {max})")]
    TooLargeForExact { n: usize, max: usize },
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("precondition failed: {0}")]
    PreconditionFailed(String),
    #[error("quadrature did not converge (estimated error {achieved:e})")]
    QuadratureError { achieved: f64 },
    #[error("invalid genus {0}")]
    InvalidGenus(i64),
    #[error("invalid order {0}: star construction needs n >= 3")]
    InvalidOrder(usize),
    #[error("invalid degree: vertex {vertex} has degree {degree} < 3")]
    InvalidDegree { vertex: usize, degree: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// Coarse failure class of an [`Error`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorClass {
    Parse,
    Structural,
    Parameter,
    Numerical,
}

impl Error {
    pub fn class(&self) -> ErrorClass {
        match self {
            Error::Parse { .. } => ErrorClass::Parse,
            Error::NotConnected
            | Error::InvalidPartition(_)
            | Error::InvalidDegree { .. }
            | Error::TooLargeForExact { .. }
            | Error::DimMismatch { .. }
            | Error::Unsupported(_) => ErrorClass::Structural,
            Error::InvalidOperator(_) | Error::NotPositive { .. } | Error::QuadratureError { .. } => {
                ErrorClass::Numerical
            }
            Error::InvalidWindow { .. }
            | Error::InvalidTime(_)
            | Error::InvalidIndex { .. }
            | Error::InvalidProjection(_)
            | Error::InvalidParams(_)
            | Error::PreconditionFailed(_)
            | Error::InvalidGenus(_)
            | Error::InvalidOrder(_) => ErrorClass::Parameter,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
