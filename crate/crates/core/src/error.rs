use thiserror::Error;

/// Errors raised anywhere in the mask-to-angle pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SlipError {
    #[error("dimension mismatch: {left_w}x{left_h} vs {right_w}x{right_h}")]
    DimensionMismatch {
        left_w: usize,
        left_h: usize,
        right_w: usize,
        right_h: usize,
    },

    #[error("invalid dimensions {width}x{height} for {len} values")]
    InvalidDimensions {
        width: usize,
        height: usize,
        len: usize,
    },

    #[error("non-finite value at index {index}")]
    NonFinite { index: usize },

    #[error("invalid configuration: {0}")]
    Config(String),

    /// No region large enough to count as contact.
    #[error("no reliable contact region (min area {min_area} px)")]
    NoContact { min_area: usize },

    #[error("degenerate ellipse fit: {0}")]
    DegenerateFit(String),

    #[error("degenerate skeleton: {pixels} pixel(s)")]
    DegenerateSkeleton { pixels: usize },

    #[error("first frame does not yield a reliable contact axis")]
    InitialContactUnreliable,

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("i/o error: {0}")]
    Io(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, SlipError>;

impl From<std::io::Error> for SlipError {
    fn from(e: std::io::Error) -> Self {
        SlipError::Io(e.to_string())
    }
}

impl From<image::ImageError> for SlipError {
    fn from(e: image::ImageError) -> Self {
        SlipError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for SlipError {
    fn from(e: serde_json::Error) -> Self {
        SlipError::Parse(e.to_string())
    }
}
