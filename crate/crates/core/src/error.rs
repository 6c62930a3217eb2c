use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("index {index} outside [0, {limit})")]
    IndexOutOfRange { index: i64, limit: usize },

    #[error("training diverged at epoch {epoch}, sample {sample}")]
    Divergence { epoch: usize, sample: usize },

    #[error("channel gain {0:e} too small to equalize")]
    DegenerateChannel(f64),

    #[error("unknown labeler `{0}`")]
    UnknownLabeler(String),

    #[error("malformed model file: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
