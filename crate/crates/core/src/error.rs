//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("factor label error: {0}")]
    Label(String),

    #[error("matrix is not Hermitian: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {min_eigenvalue:.3e} below -{tolerance:.1e}")]
    NotPsd { min_eigenvalue: f64, tolerance: f64 },

    #[error("matrix is not a density matrix: trace deviates by {deviation:.3e}")]
    NotDensity { deviation: f64 },

    #[error("matrix is not unitary: deviation {deviation:.3e} exceeds {tolerance:.1e}")]
    NotUnitary { deviation: f64, tolerance: f64 },

    #[error("matrix contains a non-finite entry")]
    NonFinite,

    #[error("purification impossible: environment dimension {env_dim} is below rank {rank}")]
    PurificationImpossible { env_dim: usize, rank: usize },

    #[error("reduced states disagree: trace distance {distance:.3e} exceeds tol_match {tol_match:.1e}")]
    ReducedStateMismatch { distance: f64, tol_match: f64 },

    #[error("transcript fails consistency: residual {residual:.3e} exceeds {tolerance:.1e}")]
    InconsistentTranscript { residual: f64, tolerance: f64 },

    #[error("SDP did not reach the optimality contract: {status} after {iterations} iterations (gap {gap:.3e}, residual {residual:.3e})")]
    SolverFailure {
        status: &'static str,
        iterations: usize,
        gap: f64,
        residual: f64,
    },

    #[error("ellipsoid breakdown at iteration {iteration}: {message}")]
    EllipsoidBreakdown { iteration: usize, message: String },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("dimension cap exceeded: {dim} > {cap}")]
    CapExceeded { dim: usize, cap: usize },

    #[error("file error: {0}")]
    Io(String),

    #[error("file format error: {0}")]
    Format(String),
}
