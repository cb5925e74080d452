use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero-norm embedding")]
    ZeroNorm,
    #[error("non-finite value at position {0}")]
    NonFinite(usize),
    #[error("empty input: {0}")]
    Empty(&'static str),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("backend '{backend}' unavailable: {message}")]
    Backend { backend: String, message: String },
    #[error("prompt of {size} tokens exceeds context limit of {limit}")]
    ContextOverflow { size: usize, limit: usize },
    #[error("unknown locator '{0}'")]
    UnknownLocator(String),
    #[error("pipeline requires adapter '{0}' which is not configured")]
    MissingAdapter(&'static str),
    #[error("unparseable completion: {raw:?}")]
    Unparseable { raw: String },
    #[error("event at t={t_ms} ms renders to {len} chars, over budget {budget}")]
    Irreducible { t_ms: u64, len: usize, budget: usize },
    #[error("frame {index}: {source}")]
    AtFrame {
        index: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("missing index for {0}")]
    MissingIndex(&'static str),
    #[error("invalid format in {what}: {message}")]
    Format { what: String, message: String },
    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn format(what: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Format { what: what.into(), message: message.into() }
    }

    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }

    pub fn backend(backend: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Backend { backend: backend.into(), message: message.into() }
    }

    pub fn at_frame(index: usize, source: Error) -> Self {
        Error::AtFrame { index, source: Box::new(source) }
    }

    /// Strips frame context to reach the underlying cause.
    pub fn root(&self) -> &Error {
        match self {
            Error::AtFrame { source, .. } => source.root(),
            other => other,
        }
    }

    pub fn is_backend(&self) -> bool {
        matches!(self.root(), Error::Backend { .. } | Error::ContextOverflow { .. })
    }
}

pub type Result<T> = std::result::Result<T, Error>;
