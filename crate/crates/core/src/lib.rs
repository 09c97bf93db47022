//! Joint design of the transmit waveform covariance matrix and the antenna
//! placement vector for a colocated MIMO radar on a uniform linear grid.

pub mod array;
pub mod covariance;
pub mod cyclic;
pub mod error;
pub mod objective;
pub mod oracle;
pub mod selector;

pub use array::{ArrayGeometry, Selection, SteeringVector};
pub use covariance::{Covariance, CovarianceSolution, SolverSettings};
pub use cyclic::{design, CycleStats, DesignOptions, DesignResult, SearchMode};
pub use error::CoreError;
pub use objective::{DesignSpec, DesignSpecBuilder, DesiredPattern, ObjectiveEvaluator};
pub use oracle::OracleReport;
pub use selector::{SearchConfig, SearchOutcome};

/// Convenience alias used throughout the crate.
pub type Complex64 = num_complex::Complex<f64>;
pub type CMatrix = nalgebra::DMatrix<Complex64>;
pub type CVector = nalgebra::DVector<Complex64>;
