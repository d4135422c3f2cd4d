use thiserror::Error;

use crate::tensor::Dims;

pub type Result<T, E = TubalError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum TubalError {
    #[error("dimension mismatch in {op}: {left} vs {right}")]
    DimMismatch {
        op: &'static str,
        left: Dims,
        right: Dims,
    },

    #[error("invalid tensor data: {0}")]
    InvalidData(String),

    #[error("frequency tensor is not conjugate-symmetric: imaginary residual {residual:.3e} exceeds {threshold:.3e}")]
    SymmetryViolation { residual: f64, threshold: f64 },

    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    #[error("rank {rank} out of range 1..={max}")]
    BadRank { rank: usize, max: usize },

    #[error("preconditioner Gram matrix is singular in frequency slice {slice} (condition {condition:.3e})")]
    SingularPreconditioner { slice: usize, condition: f64 },

    #[error("negative frequency-domain diagonal {value:.3e} in slice {slice}")]
    NegativeDiagonal { slice: usize, value: f64 },

    #[error("estimation error is zero; angle is undefined")]
    ZeroError,

    #[error("bad problem specification: {0}")]
    BadSpec(String),

    #[error("iteration diverged: {0}")]
    Diverged(String),

    #[error("malformed tensor file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl TubalError {
    pub(crate) fn dims(op: &'static str, left: Dims, right: Dims) -> Self {
        TubalError::DimMismatch { op, left, right }
    }
}
