use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension {0} is not supported (only n = 1 or n = 2)")]
    UnsupportedDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("region escapes the sampled domain")]
    RegionOutsideDomain,

    #[error("functions live on different grids")]
    GridMismatch,

    #[error("weight is degenerate: {0}")]
    DegenerateWeight(String),

    #[error("atom profile annihilated by moment projection; retry with another seed")]
    DegenerateProfile,

    #[error("dictionary generation failed: {0}")]
    Dictionary(String),

    #[error("io error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
