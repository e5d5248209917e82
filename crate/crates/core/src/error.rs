use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    /// A Hamiltonian description violates a structural invariant.
    #[error("invalid Hamiltonian spec: {0}")]
    InvalidSpec(String),

    /// All couplings cancel; the operator-norm normalization is undefined.
    #[error("degenerate spec: spectrum vanishes, normalization undefined")]
    DegenerateSpec,

    /// An argument lies outside the function's domain.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The request would exceed a hard memory or size guard.
    #[error("resource limit: {0}")]
    ResourceLimit(String),

    /// Matrix input fails the Hermiticity tolerance.
    #[error("matrix is not Hermitian (max entrywise deviation {0:.3e})")]
    NotHermitian(f64),

    /// Matrix input is not a valid density operator.
    #[error("not a density matrix: {0}")]
    NotDensity(String),

    /// Iterative eigensolver hit its sweep cap.
    #[error("eigensolver did not converge within {0} sweeps")]
    NoConvergence(usize),
}

pub type Result<T> = std::result::Result<T, Error>;
