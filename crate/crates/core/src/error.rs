use thiserror::Error;

/// Errors produced anywhere in the library.
#[derive(Debug, Error)]
pub enum QflowError {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("non-finite entry in {0}")]
    NonFinite(&'static str),

    #[error("operator is not Hermitian (residual {residual:e})")]
    NotHermitian { residual: f64 },

    #[error("invalid density matrix: {0}")]
    InvalidState(String),

    #[error("negative rate {0}")]
    NegativeRate(f64),

    #[error("Kraus operators are not complete (residual {residual:e})")]
    IncompleteKraus { residual: f64 },

    #[error("trace drift {drift:e} exceeds tolerance")]
    TraceDrift { drift: f64 },

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("random-unitary decomposition invalid (residual {residual:e})")]
    DecompositionInvalid { residual: f64 },

    #[error("measurement basis is not orthonormal (Gram residual {residual:e})")]
    NonProjective { residual: f64 },

    #[error("negative probability {0:e}")]
    NegativeProbability(f64),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("model file: {0}")]
    ModelFile(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, QflowError>;
