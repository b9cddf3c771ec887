use std::path::PathBuf;

/// Errors produced by the engine.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("format error: {0}")]
    Format(String),

    #[error("length error: expected {expected} {unit}, found {actual}")]
    Length {
        expected: usize,
        actual: usize,
        unit: &'static str,
    },

    #[error("data error: {0}")]
    Data(String),

    #[error("dimension error: {0}")]
    Dimension(String),

    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("empty input: {0}")]
    Empty(String),

    #[error("consistency error: {0}")]
    Consistency(String),

    #[error("generation error: {0}")]
    Generation(String),

    #[error("placement error: {0}")]
    Placement(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("metric undefined: {0}")]
    MetricUndefined(String),

    #[error("input error: {0}")]
    Input(String),

    #[error("manifest line {line}: {message}")]
    Manifest { line: usize, message: String },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
