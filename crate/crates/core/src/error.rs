use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the stitching pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient data: need at least {needed}, got {got}")]
    InsufficientData { needed: usize, got: usize },

    #[error("degenerate estimation: {0}")]
    Degenerate(String),

    #[error("degenerate integration axis: u_min == u_max")]
    DegenerateAxis,

    #[error("blended homography is not invertible")]
    DegenerateBlend,

    #[error("canvas of {area} pixels exceeds the configured maximum of {max}")]
    CanvasOverflow { area: u64, max: u64 },

    #[error("no inliers survived selection")]
    NoInliers,

    #[error("warped images do not overlap")]
    NoOverlap,

    #[error("seam anchors are not connected through the overlap mask")]
    NoPath,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("alignment failed: {0}")]
    AlignmentFailed(Box<Error>),

    #[error("{}:{line}: {message}", path.display())]
    Parse { path: PathBuf, line: usize, message: String },

    #[error("{}: {message}{}", path.display(), offset.map(|o| format!(" (at byte {o})")).unwrap_or_default())]
    Io {
        path: PathBuf,
        offset: Option<u64>,
        message: String,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, offset: Option<u64>, message: impl Into<String>) -> Self {
        Error::Io {
            path: path.into(),
            offset,
            message: message.into(),
        }
    }

    pub(crate) fn param(message: impl Into<String>) -> Self {
        Error::InvalidParameter(message.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
