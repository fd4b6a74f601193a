use thiserror::Error;

/// Errors raised by the simulation and analysis routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("chain length must be odd and at least 3, got {0}")]
    InvalidLength(usize),

    #[error("coupling {name} must be finite and {requirement}, got {value}")]
    InvalidCoupling {
        name: &'static str,
        requirement: &'static str,
        value: f64,
    },

    #[error("decay rate must be finite and non-negative, got {0}")]
    InvalidDecayRate(f64),

    #[error("chain is not in the topological phase: g1/g2 = {ratio} (need g1 < g2)")]
    NotTopological { ratio: f64 },

    #[error("{what} {value} out of range {range}")]
    OutOfRange {
        what: &'static str,
        value: String,
        range: String,
    },

    #[error("invalid mode occupation: {0}")]
    InvalidOccupation(String),

    #[error("Fock space dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("correlation matrix eigenvalue {0} lies outside [0, 1]")]
    NonPhysical(f64),

    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    #[error("entropy order must be positive and finite, got {0}")]
    InvalidOrder(f64),

    #[error("invalid time grid: {0}")]
    InvalidGrid(String),

    #[error("curves are sampled on different time grids")]
    GridMismatch,

    #[error("integration failed at t = {t}: {reason}")]
    Integration { t: f64, reason: String },

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
