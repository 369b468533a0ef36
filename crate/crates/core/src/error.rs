use thiserror::Error;

/// Errors produced by the verification library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("expected {expected} values, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("axis {axis} out of range for a {dim}-dimensional grid")]
    InvalidAxis { axis: usize, dim: usize },

    #[error("unsupported derivative order {0} (expected 1 or 2)")]
    InvalidOrder(usize),

    #[error("function has non-zero mean {mean:e}; the inverse derivative needs mean-free input")]
    NonZeroMean { mean: f64 },

    #[error("sample point {0} outside [0, 2pi)")]
    SampleOutOfRange(f64),

    #[error("u_x must be positive everywhere (min u_x = {min:e})")]
    NonPositiveSlope { min: f64 },

    #[error("unsupported power p = {0}")]
    UnsupportedPower(i32),

    #[error("wrong grid dimension for case: {0}")]
    WrongDimension(String),

    #[error("missing jet component {0}")]
    MissingJet(String),

    #[error("blow-up detected at t = {time}: max |v_x| = {slope:e}")]
    BlowupDetected { time: f64, slope: f64 },

    #[error("no convergence in characteristic solve at x = {x} (past the caustic?)")]
    NoConvergence { x: f64 },

    #[error("density depends on u explicitly and cannot be evaluated on a field with slope {0}")]
    SlopedExplicitDensity(f64),

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown identifier '{name}' at position {position}")]
    UnknownIdentifier { name: String, position: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, Error>;
