use thiserror::Error;

/// Errors produced by the reconstruction library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("non-finite coordinate at point {point}")]
    NonFinite { point: usize },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("point lies within {distance:.3e} of the medial axis; projection is not unique")]
    MedialAxis { distance: f64 },

    #[error("point is {distance:.3e} away from the manifold")]
    OffManifold { distance: f64 },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("record store mismatch: expected config hash {expected}, found {found}")]
    ConfigHashMismatch { expected: String, found: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn precondition<S: Into<String>>(ok: bool, msg: S) -> Result<()> {
    if ok {
        Ok(())
    } else {
        Err(Error::Precondition(msg.into()))
    }
}
