use std::path::PathBuf;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("bundle size k = {k} out of range (supported: 1..={max})")]
    BundleSize { k: usize, max: usize },

    #[error("invalid rank vector: {0}")]
    RankVector(String),

    #[error("unknown noise matrix `{name}` (available: {available})")]
    UnknownMatrix { name: String, available: String },

    #[error("unknown objective `{name}` (available: {available})")]
    UnknownObjective { name: String, available: String },

    #[error("noise matrix `{label}` is not doubly stochastic: {detail}")]
    NotStochastic { label: String, detail: String },

    #[error("invalid matrix: {0}")]
    Matrix(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("parameter out of range: {0}")]
    Range(String),

    #[error("degenerate objective: {0}")]
    DegenerateObjective(String),

    #[error("ordering does not match the type set: {0}")]
    Ordering(String),

    #[error("sampling failed: {0}")]
    Sampling(String),

    #[error("cannot parse `{input}` as a rational number")]
    ParseRational { input: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{context}: {source}")]
    Json {
        context: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("malformed file {path}: {detail}")]
    Format { path: PathBuf, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(context: impl Into<String>, source: serde_json::Error) -> Self {
        Error::Json {
            context: context.into(),
            source,
        }
    }
}
