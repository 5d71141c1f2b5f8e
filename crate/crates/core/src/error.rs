use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid marking: {0}")]
    InvalidMarking(String),
    #[error("capacity exceeded: {what} is {got}, limit {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },
    #[error("invalid matrix: {0}")]
    InvalidMatrix(String),
    #[error("invalid point: {0}")]
    InvalidPoint(String),
    #[error("undefined event: {0}")]
    UndefinedEvent(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("log-domain error: {0}")]
    LogDomain(String),
    #[error("ordering error: {0}")]
    Ordering(String),
    #[error("singular input: {0}")]
    Singular(String),
    #[error("outside domain: {0}")]
    Domain(String),
    #[error("ill-conditioned stencil: {0}")]
    Conditioning(String),
    #[error("internal invariant failure: {0}")]
    Internal(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn capacity(what: &'static str, got: usize, limit: usize) -> Result<()> {
    if got > limit {
        Err(Error::Capacity { what, got, limit })
    } else {
        Ok(())
    }
}
