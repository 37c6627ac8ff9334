use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {left:?} vs {right:?}")]
    DimensionMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("image of {width}x{height} is too small (need at least {min}x{min})")]
    ImageTooSmall {
        width: usize,
        height: usize,
        min: usize,
    },

    #[error("invalid noise specification: {0}")]
    InvalidNoise(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("curvelet geometry mismatch")]
    GeometryMismatch,

    #[error("inconsistent match sets: {0}")]
    InconsistentMatches(String),

    #[error("missing calibration: {0}")]
    MissingCalibration(String),

    #[error("malformed container: {0}")]
    Format(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("image codec error on {path}: {source}")]
    Codec {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
