use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (max defect {defect:e})")]
    NonHermitianInput { defect: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operation requires dimension {expected}, got {got}")]
    WrongDimension { expected: usize, got: usize },

    #[error("invalid matrix data: {0}")]
    InvalidData(String),

    #[error("Jacobi eigensolver did not converge after {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    EigenNotConverged { sweeps: usize, off_norm: f64 },

    #[error("state is not normalized (norm² = {norm_sq})")]
    NotNormalized { norm_sq: f64 },

    #[error("not a density matrix: {0}")]
    InvalidState(String),

    #[error("invalid rank {rank} for dimension {dim}")]
    InvalidRank { rank: usize, dim: usize },

    #[error("invalid system spec: {0}")]
    InvalidSpec(String),

    #[error("operation requires the default equally spaced spectrum with unit threshold")]
    WrongSpec,

    #[error("Kraus set is incomplete: max |Σ K†K − I| = {defect:e}")]
    IncompleteKrausSet { defect: f64 },

    #[error("Kraus set has {count} operators; at most {max} are supported")]
    TooManyKrausOperators { count: usize, max: usize },

    #[error("pure state is free (|c| ≤ |a|); the line bound needs a resourceful state")]
    NotResourceful,

    #[error("interior-point solver did not converge after {iterations} iterations (gap {gap:e})")]
    SolverNotConverged {
        iterations: usize,
        gap: f64,
        /// Objective value at the best iterate.
        best_value: f64,
        /// Best state iterate, row-major `[re, im]` entries.
        best_iterate: Vec<[f64; 2]>,
    },

    #[error("{failed} of {total} scan samples failed (limit 0.1%)")]
    TooManyFailures { failed: usize, total: usize },

    #[error("empty input")]
    EmptyInput,

    #[error("{0}")]
    Config(String),

    #[error("I/O failure: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::InvalidData(e.to_string())
    }
}
