//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),

    #[error("dimension mismatch: expected N={expected}, got N={got}")]
    DimensionMismatch { expected: u8, got: u8 },

    #[error("unsupported dimension N={0} (only N=2 and N=3)")]
    UnsupportedDimension(u8),

    #[error("radius must be positive, got {0}")]
    InvalidRadius(f64),

    #[error("degenerate rectangle")]
    DegenerateRectangle,

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("ellipticity violation: min directional quotient {0} <= 0")]
    EllipticityViolation(f64),

    #[error("atom at ({0}, {1}) lies outside the closure of the grid rectangle")]
    AtomOutsideDomain(f64, f64),

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("linear solve failed: {0}")]
    SolveFailed(String),

    #[error("measures are not mutually singular")]
    NotMutuallySingular,

    #[error("denominator ball average is zero at radius {0}")]
    ZeroDenominator(f64),

    #[error("infeasible obstacle: {0}")]
    InfeasibleObstacle(String),

    #[error("complementarity solver did not converge within {iterations} sweeps (last change {delta:.3e}, comp residual {comp:.3e})")]
    SolverDiverged {
        iterations: usize,
        delta: f64,
        comp: f64,
    },

    #[error("measure is not capacity-regular: {0}")]
    NotRegular(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
