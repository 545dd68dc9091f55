//! Crate-wide error type.

use std::path::PathBuf;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("failed to decode image {path}: {source}")]
    ImageDecode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("failed to encode image {path}: {source}")]
    ImageEncode {
        path: PathBuf,
        #[source]
        source: image::ImageError,
    },

    #[error("parse error in {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("no files match frame pattern {0}")]
    NoFramesMatch(String),

    #[error("mask for frame {frame_index} not found under {dir}")]
    MissingFrameMask { dir: PathBuf, frame_index: usize },

    #[error("expected 16-bit grayscale PNG at {0}")]
    MaskBitDepth(PathBuf),

    #[error("signal is empty")]
    EmptySignal,

    #[error("signal too short: {0}")]
    SignalTooShort(String),

    #[error("invalid band-pass spec: {0}")]
    InvalidBand(String),

    #[error("window of {window} samples exceeds signal length {len}")]
    WindowTooLong { window: usize, len: usize },

    #[error("channel {0} has zero temporal mean")]
    ZeroMeanChannel(&'static str),

    #[error("trace is rank-deficient: {0}")]
    RankDeficient(String),

    #[error("degenerate point set: {0}")]
    DegeneratePoints(String),

    #[error("no valid frames in video")]
    NoValidFrames,

    #[error(
        "frequency band [{lo:.3}, {hi:.3}] Hz is empty after Nyquist clipping at {nyquist:.3} Hz"
    )]
    EmptyBand { lo: f64, hi: f64, nyquist: f64 },

    #[error("SNR noise region is empty for the given band and template widths")]
    EmptyNoiseRegion,

    #[error("metric inputs differ in length: {0} vs {1}")]
    LengthMismatch(usize, usize),

    #[error("MAPE requires strictly positive ground truth (found {0})")]
    NonPositiveGroundTruth(f64),

    #[error("missing result for record {0}")]
    MissingResult(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn parse(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::Parse {
            path: path.into(),
            message: message.into(),
        }
    }
}
