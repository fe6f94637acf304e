use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("expected {expected} entries for a square matrix, got {found}")]
    NotSquare { expected: usize, found: usize },

    #[error("matrix dimension must be positive")]
    EmptyMatrix,

    #[error("matrix contains a non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max deviation {deviation:e})")]
    NotHermitian { deviation: f64 },

    #[error("trace {trace} differs from 1")]
    TraceNotUnity { trace: f64 },

    #[error("matrix is not positive semidefinite (minimum eigenvalue {min_eigenvalue:e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("Jacobi iteration did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("correlation entry has imaginary part {imag:e}")]
    ComplexCorrelation { imag: f64 },

    #[error("post-selection success probability {success_prob:e} is too small to normalize")]
    DegenerateOutcome { success_prob: f64 },

    #[error("ODE oracle step size not converged: halving the step changed G by {change:e}")]
    StepNotConverged { change: f64 },

    #[error("could not start worker pool: {0}")]
    ThreadPool(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}
