use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("shape mismatch: {0}")]
    Shape(String),

    #[error("index {index} outside the window |j| <= {half_width}")]
    OutOfWindow { index: i64, half_width: usize },

    #[error("unknown spectrum `{0}`")]
    UnknownSpectrum(String),

    #[error("spectrum `{0}` has no closed-form derivative")]
    UnsupportedSpectrum(String),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidInput(msg.into())
}
