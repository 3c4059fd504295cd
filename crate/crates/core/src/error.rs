//! Error type shared by all numerical modules.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian: max |a_ij - conj(a_ji)| = {asymmetry:.3e} exceeds {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("eigensolver did not converge within {0} sweeps")]
    EigDidNotConverge(usize),

    #[error("not a valid density matrix: {0}")]
    InvalidDensity(String),

    #[error("integrator instability at t = {t:.4}: |trace - 1| = {drift:.3e} exceeds 1e-4; reduce dt")]
    IntegratorInstability { t: f64, drift: f64 },

    #[error("positivity loss at t = {t:.4}: min eigenvalue {min_eigenvalue:.3e} below -1e-6; reduce dt")]
    PositivityLoss { t: f64, min_eigenvalue: f64 },

    #[error("degenerate ancilla state: parameterization has zero trace")]
    DegenerateAncilla,

    #[error("non-finite loss or gradient: {0}")]
    NonFinite(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

pub type Result<T> = std::result::Result<T, Error>;
