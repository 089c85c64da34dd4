use thiserror::Error;

#[derive(Debug, Error)]
pub enum SeldError {
    #[error("clip too short: {len} samples, need at least {window}")]
    ClipTooShort { len: usize, window: usize },
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("uninitialized running stats")]
    UninitializedRunningStats,
    #[error("empty reference")]
    EmptyReference,
    #[error("numeric divergence: {0}")]
    Divergence(String),
    #[error("bad file format: {0}")]
    Format(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("wav error: {0}")]
    Wav(#[from] hound::Error),
}

impl SeldError {
    pub(crate) fn shape(msg: impl Into<String>) -> Self {
        SeldError::Shape(msg.into())
    }

    pub(crate) fn config(msg: impl Into<String>) -> Self {
        SeldError::Config(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SeldError::Invalid(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, SeldError>;
