use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("unsupported image format: {0}")]
    UnsupportedFormat(String),
    #[error("invalid frame: {0}")]
    InvalidFrame(String),
    #[error("frame dimensions {height}x{width} must be even")]
    OddDimensions { height: usize, width: usize },

    #[error("invalid kernel size {0}: must be odd and within [1, 31]")]
    InvalidSize(usize),
    #[error("invalid sigma {0}: must be finite and > 0")]
    InvalidSigma(f64),
    #[error("corrupt kernel pool: {0}")]
    CorruptPool(String),
    #[error("kernel {index} sums to {sum}, more than 1e-3 away from 1")]
    UnnormalizedKernel { index: usize, sum: f64 },
    #[error("kernel of size {kernel} does not fit a {height}x{width} frame")]
    KernelLargerThanFrame {
        kernel: usize,
        height: usize,
        width: usize,
    },

    #[error("covariance matrix is not symmetric positive semi-definite")]
    NonPsdCovariance,
    #[error("invalid noise parameters: {0}")]
    InvalidNoise(String),

    #[error("output size {height}x{width} is below the 8x8 minimum")]
    OutputTooSmall { height: usize, width: usize },
    #[error("invalid resample parameters: {0}")]
    InvalidResample(String),

    #[error("invalid box size {0}: must be odd and within [3, 15]")]
    InvalidBoxSize(usize),

    #[error("invalid JPEG quality {0}: must be within [1, 100]")]
    InvalidQuality(u32),
    #[error("invalid codec parameters: {0}")]
    InvalidCodec(String),
    #[error("external codec failed: {0}")]
    ExternalCodecFailure(String),
    #[error("clip has no frames")]
    EmptyClip,

    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("pop from empty queue")]
    PopFromEmpty,
    #[error("no clips found under {0}")]
    NoClipsFound(PathBuf),
    #[error("clip {path} has {frames} frames, fewer than the group length {group_len}")]
    ClipTooShort {
        path: PathBuf,
        frames: usize,
        group_len: usize,
    },
    #[error("malformed JSON in {path}: {message}")]
    Json { path: PathBuf, message: String },

    #[error("frame of {height}x{width} is too small (minimum {min})")]
    FrameTooSmall {
        height: usize,
        width: usize,
        min: usize,
    },
    #[error("need at least {needed} samples, got {got}")]
    TooFewSamples { needed: usize, got: usize },
    #[error("samples have zero variance")]
    DegenerateSamples,
    #[error("quality model not found at {0}")]
    MissingModel(PathBuf),
    #[error("quality model shape mismatch: {0}")]
    ModelShapeMismatch(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
