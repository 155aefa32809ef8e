use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("point is not strictly inside the affine patch (<x, pole> = {dot:e})")]
    PatchViolation { dot: f64 },

    #[error("matrix is not symmetric (asymmetry {asymmetry:e})")]
    NotSymmetric { asymmetry: f64 },

    #[error("rays do not lie in a common open hemisphere (margin {margin:e})")]
    NoHemisphere { margin: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("need at least {needed} rays, got {got}")]
    TooFewRays { needed: usize, got: usize },

    #[error("point set has affine dimension {rank} < {dim}")]
    DegenerateHull { rank: usize, dim: usize },

    #[error("dimension {0} is not supported (n must be in 1..=4)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("point is not in the dual body (min <ray, y> = {min_dot:e})")]
    NotInDual { min_dot: f64 },

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("expected positive values, got {0}")]
    NonPositive(f64),

    #[error("image of the box crosses the equator of the affine patch")]
    EquatorCrossing,

    #[error("generator `{label}` does not preserve the body (mismatch {mismatch:e})")]
    NotInvariant { label: String, mismatch: f64 },

    #[error("degenerate simplex (|det| = {det:e})")]
    DegenerateSimplex { det: f64 },

    #[error("matrix is singular or numerically not invertible (condition {condition:e})")]
    Singular { condition: f64 },

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    /// Machine-readable name used in JSON error payloads.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::PatchViolation { .. } => "PatchViolation",
            Error::NotSymmetric { .. } => "NotSymmetric",
            Error::NoHemisphere { .. } => "NoHemisphere",
            Error::Degenerate(_) => "Degenerate",
            Error::TooFewRays { .. } => "TooFewRays",
            Error::DegenerateHull { .. } => "DegenerateHull",
            Error::UnsupportedDimension(_) => "UnsupportedDimension",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::NotInDual { .. } => "NotInDual",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::NonPositive(_) => "NonPositive",
            Error::EquatorCrossing => "EquatorCrossing",
            Error::NotInvariant { .. } => "NotInvariant",
            Error::DegenerateSimplex { .. } => "DegenerateSimplex",
            Error::Singular { .. } => "Singular",
            Error::Validation(_) => "Validation",
            Error::Parse(_) => "Parse",
            Error::Io(_) => "Io",
        }
    }

    /// Process exit code: 1 validation, 2 numerical non-convergence, 3 I/O.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NoConvergence { .. } => 2,
            Error::Io(_) => 3,
            _ => 1,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
