use alloc::string::String;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    Geometry(String),
    #[error("mode {mode} out of range for {modes} modes")]
    ModeOutOfRange { mode: usize, modes: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("particle number {n_f} exceeds mode count {modes}")]
    TooManyParticles { n_f: usize, modes: usize },
    #[error("operator is not Hermitian: {0}")]
    NotHermitian(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver did not converge after {restarts} restarts (residual {residual:e})")]
    NoConvergence { restarts: usize, residual: f64 },
    #[error("fit needs at least 3 points, got {0}")]
    TooFewPoints(usize),
    #[error("non-positive value in log-log fit: ({0}, {1})")]
    NonPositive(f64, f64),
}
