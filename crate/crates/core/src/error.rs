use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("matrix is not Hermitian (residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not unitary (residual {residual:.3e})")]
    NotUnitary { residual: f64 },

    #[error("eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:.3e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("Kraus operators are not complete: residual {residual:.3e} exceeds tolerance {tol:.1e}")]
    Incomplete { residual: f64, tol: f64 },

    #[error("value out of range: {0}")]
    OutOfRange(String),

    #[error("malformed input: {0}")]
    Malformed(String),

    #[error("i/o error: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;
