use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("non-finite sample in component {component} at flat index {index}")]
    NonFinite { component: usize, index: usize },
    #[error("coefficients are not Hermitian-symmetric: defect {defect:e} at flat index {index}")]
    NotHermitian { index: usize, defect: f64 },
    #[error("derivative order {0} exceeds the supported maximum of 4")]
    DerivativeOrder(usize),
    #[error("Sobolev order {0} outside 0..=3")]
    SobolevOrder(usize),
    #[error("invalid cutoff: {0}")]
    InvalidCutoff(String),
    #[error("cutoff R0 = {r_big} is not resolved on this grid (largest axis frequency {limit})")]
    UnresolvedCutoff { r_big: f64, limit: f64 },
    #[error("grid mismatch between operands")]
    GridMismatch,
    #[error("expected {expected} components, found {found}")]
    ComponentMismatch { expected: usize, found: usize },
    #[error("invalid frequency magnitude {0}")]
    InvalidFrequency(f64),
    #[error("negative time {0}")]
    NegativeTime(f64),
    #[error("invalid integrator setting: {0}")]
    InvalidIntegrator(String),
    #[error("fit rejected: {0}")]
    Fit(String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("snapshot: {0}")]
    Snapshot(String),
    #[error("csv: {0}")]
    Csv(String),
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
