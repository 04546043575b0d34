//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A required integral is non-finite or an assembly step broke down.
    #[error("numerical failure: {0}")]
    NumericalFailure(String),

    /// The eigenvalue near the certification threshold moved too much under
    /// one uniform refinement.
    #[error("mesh too coarse: relative change {rel_change:.3e} exceeds {rtol:.3e} near lambda_max")]
    MeshTooCoarse { rel_change: f64, rtol: f64 },

    /// Admissibility regression needs samples spanning at least a decade in |rho|.
    #[error("insufficient samples: |rho| range spans a factor {span:.3} < 10")]
    InsufficientSamples { span: f64 },

    /// The dyadic schedule produced m0 > m.
    #[error("schedule inverted: m0 = {m0} > m = {m}")]
    ScheduleInverted { m0: u32, m: u32 },

    /// A count was requested beyond the certification threshold of the index.
    #[error("index incomplete: lambda = {lambda} exceeds certified lambda_max = {lambda_max}")]
    IndexIncomplete { lambda: f64, lambda_max: f64 },

    /// Counting curves passed to a sandwich check live on different grids.
    #[error("grid mismatch between counting curves")]
    GridMismatch,

    /// Too few grid points for a Weyl fit.
    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// Hardy-type hypothesis 2*beta + alpha > 1 violated.
    #[error("outside regime: 2*beta + alpha = {value} <= 1")]
    OutsideRegime { value: f64 },

    /// Bad run configuration or malformed input file.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
