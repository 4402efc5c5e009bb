use thiserror::Error;

/// Errors raised by the numerical routines and the experiment runner.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("chart {chart} undefined: |psi^{chart}| = {modulus:e} is below the floor {floor:e}")]
    ChartUndefined { chart: usize, modulus: f64, floor: f64 },

    #[error("too close to the coordinate pole: cos = {cos:e} below floor {floor:e}")]
    NearPole { cos: f64, floor: f64 },

    #[error("ODE integration failed at l = {at:e}: {reason}")]
    StepFailure { at: f64, reason: String },

    #[error("state is at the vacuum (|phi^0| / R = {ratio}); coset direction is undefined")]
    AtVacuum { ratio: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("quadrature did not converge: coefficient change {change:e} with {nodes} nodes")]
    QuadratureUnconverged { change: f64, nodes: usize },

    #[error("grid too coarse: {points} points, at least {required} required")]
    GridTooCoarse { points: usize, required: usize },

    #[error("polynomial field of degree {degree} exceeds the supported degree {max}")]
    DegreeExceeded { degree: usize, max: usize },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    ConfigInvalid(String),

    #[error("I/O error: {0}")]
    Io(String),

    #[error("report parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
