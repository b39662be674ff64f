use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },
    #[error("degree {degree} out of range 0..={max}")]
    DegreeOutOfRange { degree: usize, max: usize },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("zero symbol has no order")]
    ZeroSymbol,
    #[error("symbol is not of the form h(xi')/R^k: {0}")]
    NotLiftClassifiable(String),
    #[error("unsupported base symbol: {0}")]
    UnsupportedBase(String),
    #[error("malformed symbol: {0}")]
    MalformedSymbol(String),
    #[error("invalid combination: {0}")]
    InvalidCombination(String),
    #[error("polynomial degree {degree} exceeds supported maximum {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("nonpositive width {0}")]
    NonpositiveWidth(f64),
    #[error("degenerate overlap {0:e}")]
    DegenerateOverlap(f64),
    #[error("kernel detection failed: {0}")]
    KernelDetection(String),
    #[error("truncation too small: {0}")]
    TruncationTooSmall(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("unknown selector '{name}'; available: {available}")]
    UnknownSelector { name: String, available: String },
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;
