use thiserror::Error;

/// Errors raised by state construction, bound evaluation and recurrence scans.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("empty system: dimension must be at least 1")]
    Empty,

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("matrix is not positive semidefinite (min eigenvalue {0:e})")]
    NotPositive(f64),

    #[error("trace deviates from 1 by {0:e}")]
    BadTrace(f64),

    #[error("amplitude vector is not normalized (squared norm {0})")]
    NotNormalized(f64),

    #[error("bad parameter: {0}")]
    BadParameter(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("Hermitian eigendecomposition did not converge")]
    EigenFailure,

    #[error("argument outside domain: {0}")]
    BadDomain(String),

    #[error("state is stationary: energy uncertainty {0:e} is zero")]
    StationaryState(f64),

    #[error("precondition violated: epsilon {epsilon} must be below {max_epsilon}")]
    PreconditionViolated { epsilon: f64, max_epsilon: f64 },

    #[error("degenerate spectrum: all frequencies are equal")]
    DegenerateSpectrum,

    #[error("truncation size {n_keep} outside 1..={dim}")]
    BadN { n_keep: usize, dim: usize },

    #[error("relevant states carry zero probability")]
    ZeroProbability,

    #[error("population of level {level} is zero")]
    ZeroPopulation { level: usize },

    #[error("distance matrix is not a metric: {0}")]
    NotMetric(String),

    #[error("map is not an isometry: d(T{x},T{y}) differs from d({x},{y})")]
    NotIsometry { x: usize, y: usize },

    #[error("map does not preserve the measure at point {0}")]
    NotMeasurePreserving(usize),

    #[error("time step {dt} exceeds the resolvable maximum {max_dt}")]
    GridTooCoarse { dt: f64, max_dt: f64 },

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Short machine-readable tag used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotSquare { .. } => "NotSquare",
            Error::Empty => "Empty",
            Error::NotHermitian(_) => "NotHermitian",
            Error::NotPositive(_) => "NotPositive",
            Error::BadTrace(_) => "BadTrace",
            Error::NotNormalized(_) => "NotNormalized",
            Error::BadParameter(_) => "BadParameter",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::EigenFailure => "EigenFailure",
            Error::BadDomain(_) => "BadDomain",
            Error::StationaryState(_) => "StationaryState",
            Error::PreconditionViolated { .. } => "PreconditionViolated",
            Error::DegenerateSpectrum => "DegenerateSpectrum",
            Error::BadN { .. } => "BadN",
            Error::ZeroProbability => "ZeroProbability",
            Error::ZeroPopulation { .. } => "ZeroPopulation",
            Error::NotMetric(_) => "NotMetric",
            Error::NotIsometry { .. } => "NotIsometry",
            Error::NotMeasurePreserving(_) => "NotMeasurePreserving",
            Error::GridTooCoarse { .. } => "GridTooCoarse",
            Error::Io(_) => "Io",
            Error::Parse(_) => "Parse",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
