use thiserror::Error;

/// Errors raised by the engine.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("boost speed {speed} is not below the speed of light")]
    InvalidVelocity { speed: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("tensor-product dimension {dimension} exceeds the cap {cap}")]
    CapacityExceeded { dimension: usize, cap: usize },

    #[error("index {index} is outside 1..={count}")]
    ParticleIndex { index: usize, count: usize },

    #[error("mode {index} is off the mass shell (|p.p - m^2| = {residual:e})")]
    OffShell { index: usize, residual: f64 },

    #[error("mode {index} violates the Lorenz condition (|p.eps| = {residual:e})")]
    Transversality { index: usize, residual: f64 },

    #[error("{name} must be positive, got {value}")]
    NonPositive { name: &'static str, value: f64 },

    #[error("invalid observer: {0}")]
    InvalidObserver(String),

    #[error("tensor is not antisymmetric (max |T + T^T| = {residual:e})")]
    NotAntisymmetric { residual: f64 },

    #[error("bilinear form has imaginary part {imaginary:e}, expected a real value")]
    Consistency { imaginary: f64 },

    #[error("time step {dt} violates the stability bound {bound}")]
    Stability { dt: f64, bound: f64 },

    #[error("event (t = {t}, x = {x}) lies outside the field domain")]
    OutOfDomain { t: f64, x: f64 },

    #[error("guiding density {density:e} at t = {t} is below the node threshold")]
    Node { t: f64, density: f64 },

    #[error("degenerate density: every scanned value is below the node threshold")]
    DegenerateDensity,

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
