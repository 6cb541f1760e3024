//! Crate-wide error type.

use thiserror::Error;

/// Convenience alias used by every fallible operation in this crate.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),

    #[error("image error: {0}")]
    Image(#[from] image::ImageError),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    /// A config or spec failed validation before any work started.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// Binary or JSON container did not start with the expected header.
    #[error("malformed header in {path}: {reason}")]
    MalformedHeader { path: String, reason: String },

    /// Header was readable but the payload ended early or carried junk.
    #[error("truncated payload in {path}: expected {expected} bytes, got {got}")]
    TruncatedPayload {
        path: String,
        expected: usize,
        got: usize,
    },

    /// Two containers that must agree on shape do not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A stored probability or label was outside its documented range.
    #[error("invalid payload value in {path}: {reason}")]
    InvalidValue { path: String, reason: String },

    /// Temporal operations need at least two frames.
    #[error("tube has {frames} frame(s); temporal connections need at least 2")]
    TubeTooShort { frames: usize },

    /// Synthetic generation would leave an instance with no visible pixels.
    #[error("instance {instance} has no visible pixels in frame {frame}")]
    EmptyInstance { instance: usize, frame: usize },

    /// Ground-truth masks overlap, so they cannot be stored as a label map.
    #[error("ground-truth masks overlap at frame {frame}")]
    OverlappingMasks { frame: usize },

    /// A per-frame instance label map was requested but none is available.
    #[error("no ground-truth instance labels for frame {frame}")]
    MissingLabels { frame: usize },

    /// Accuracy is undefined when no frame pair produced a single match.
    #[error("no matched pairs; correspondence accuracy is undefined")]
    NoMatchedPairs,

    /// Training produced a non-finite loss.
    #[error("training diverged at step {step}: loss = {value}")]
    Divergence { step: usize, value: f64 },
}

impl Error {
    pub(crate) fn invalid_config(msg: impl Into<String>) -> Self {
        Error::InvalidConfig(msg.into())
    }

    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}
