use thiserror::Error;

/// Errors raised across the lab. Every variant carries enough context to be
/// reported verbatim in a machine-readable error record.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LabError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("grids differ: {0}")]
    GridMismatch(String),

    #[error("invalid profile: {0}")]
    InvalidProfile(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("modulation index {0:?} outside the truncated index set")]
    IndexOutOfRange(Vec<i64>),

    #[error("zero norm: {0}")]
    ZeroNorm(String),

    #[error("embedding hypothesis violated: {0}")]
    HypothesisViolation(String),

    #[error("non-finite value detected: {0}")]
    NonFinite(String),

    #[error("window too large: fixed-point map not contracting (measured ratio {ratio:.4} at iteration {iteration}) [{context}]")]
    NonContraction {
        ratio: f64,
        iteration: usize,
        context: String,
    },

    #[error("cutoff radius {radius:.4} exceeds the resolved band {band:.4}; refine the grid")]
    CutoffBeyondBand { radius: f64, band: f64 },

    #[error("inadmissible exponent pair: {0}")]
    Inadmissible(String),

    #[error("insufficient data: {0}")]
    Insufficient(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("i/o error: {0}")]
    Io(String),
}

impl From<std::io::Error> for LabError {
    fn from(e: std::io::Error) -> Self {
        LabError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, LabError>;
