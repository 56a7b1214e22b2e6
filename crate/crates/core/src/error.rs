use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("grid mismatch: {0}")]
    GridMismatch(String),

    #[error("grid too small: need half_width >= {needed}, have {available}")]
    GridTooSmall { needed: usize, available: usize },

    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("unsupported field: {0}")]
    UnsupportedField(String),

    #[error("derivative order a={a}, b={b} exceeds the guard of {max}")]
    DegreeGuard { a: u32, b: u32, max: u32 },

    #[error("frequency point ({px}, {py}) lies outside [-pi/lambda, pi/lambda]^2 for lambda={lambda}")]
    OutsideFundamentalDomain { px: f64, py: f64, lambda: f64 },

    #[error("kernel truncation: tail mass bound {bound:.3e} exceeds 1e-8 at half_width {half_width}; use a larger grid")]
    Truncation { bound: f64, half_width: usize },

    #[error("singular system: {0}")]
    Singular(String),

    #[error("charge conservation violated: {0}")]
    ChargeViolation(String),

    #[error("invalid config: {}", .0.join("; "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }

    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        Error::ShapeMismatch(msg.into())
    }
}
