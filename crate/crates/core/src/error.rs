use thiserror::Error;

pub type Result<T> = std::result::Result<T, DistillError>;

/// Failure modes. `InvalidInput`/`DimensionMismatch`/`NotHermitian` describe bad
/// arguments; `Convergence` and `NumericalFailure` mean the numerics gave out on
/// valid input; `InvariantViolation` means a proven bound was contradicted.
#[derive(Debug, Error)]
pub enum DistillError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("matrix is not Hermitian (max deviation {0:.3e})")]
    NotHermitian(f64),
    #[error("eigensolver failed to converge on a {0}x{0} matrix")]
    Convergence(usize),
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("invariant violated: {0}")]
    InvariantViolation(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

impl DistillError {
    /// True for errors caused by the caller's input rather than the numerics.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            DistillError::InvalidInput(_)
                | DistillError::DimensionMismatch(_)
                | DistillError::NotHermitian(_)
                | DistillError::Io(_)
                | DistillError::Json(_)
        )
    }
}
