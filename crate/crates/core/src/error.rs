use thiserror::Error;

/// Errors raised by channel construction, decomposition and recovery routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix contains non-finite entries")]
    NonFinite,

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimMismatch {
        context: &'static str,
        expected: String,
        found: String,
    },

    #[error("matrix is not traceless (|tr| = {0:e})")]
    NotTraceless(f64),

    #[error("no sign change found on the phase torus after {0} samples")]
    SearchFailed(usize),

    #[error("constraint violated: {0}")]
    ConstraintViolated(String),

    #[error("matrix is not unitary (defect {0:e})")]
    NotUnitary(f64),

    #[error("vectors are not orthonormal (defect {0:e})")]
    NotOrthonormal(f64),

    #[error("Kraus lists describe different channels (Choi distance {0:e})")]
    NotSameChannel(f64),

    #[error("no unitary recombination connects the Kraus lists (residual {0:e})")]
    NoUnitarySolution(f64),

    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error("Kraus operators are not proportional to isometries (residual {0:e})")]
    NotQDecomposition(f64),

    #[error("t*t is not diagonal in the encoding basis (off-diagonal {0:e})")]
    NotClassicalDecomposition(f64),

    #[error("invalid spin: 2s = {0} must be a positive integer")]
    InvalidSpin(u32),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn dim_mismatch(context: &'static str, expected: impl ToString, found: impl ToString) -> Error {
    Error::DimMismatch {
        context,
        expected: expected.to_string(),
        found: found.to_string(),
    }
}
