//! Error type shared by the design library.

use thiserror::Error;

/// Errors raised by geometry, objective and solver code.
#[derive(Debug, Clone, Error)]
pub enum CoreError {
    /// An angle fell outside the open sector (-90°, 90°).
    #[error("angle {0}° lies outside the open interval (-90°, 90°)")]
    AngleOutOfRange(f64),

    /// Mismatched dimensions between two arguments of an operation.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A scenario description failed validation.
    #[error("invalid design spec: {0}")]
    InvalidSpec(String),

    /// A matrix expected to be Hermitian was not, within tolerance.
    #[error("matrix is not Hermitian (max |R - R^H| = {deviation:.3e}, tol {tol:.3e})")]
    NotHermitian { deviation: f64, tol: f64 },

    /// A matrix expected to be positive semidefinite had a negative eigenvalue.
    #[error("matrix is not positive semidefinite (min eigenvalue {min_eigenvalue:.6e})")]
    NotPsd { min_eigenvalue: f64 },

    /// A covariance diagonal entry deviated from the uniform power value.
    #[error("diagonal entry {index} is {value:.9e}, expected {expected:.9e} (tol {tol:.1e})")]
    DiagonalMismatch {
        index: usize,
        value: f64,
        expected: f64,
        tol: f64,
    },

    /// The imaginary residue of a quadratic form exceeded its tolerance.
    #[error("quadratic form has imaginary residue {residue:.3e} (tol {tol:.3e}); covariance is not Hermitian")]
    ImaginaryResidue { residue: f64, tol: f64 },

    /// The pattern scaling factor must be strictly positive.
    #[error("alpha must be positive, got {0}")]
    NonPositiveAlpha(f64),

    /// The desired pattern is identically zero on the weighted grid, so the
    /// optimal scaling factor is undefined.
    #[error("desired pattern is zero everywhere the weights are positive; alpha is undefined")]
    DegeneratePattern,

    /// A selection with no active bits was passed where at least one antenna
    /// is required.
    #[error("selection has no active bits")]
    EmptySelection,

    /// The candidate set of a search generation was empty.
    #[error("no admissible candidate remains in the search neighbourhood")]
    SearchExhausted,

    /// Exhaustive enumeration was refused because the candidate count
    /// exceeds the configured guard.
    #[error("enumeration guard: C({m}, {n}) = {count} candidates exceeds the limit of {limit}")]
    EnumerationGuard {
        m: usize,
        n: usize,
        count: u128,
        limit: u128,
    },
}
