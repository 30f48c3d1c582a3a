use std::path::PathBuf;

/// Errors raised by the numerical kernels, model constructors and experiment runners.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is not Hermitian: asymmetry {asymmetry:.3e} exceeds tolerance {tolerance:.3e}")]
    NotHermitian { asymmetry: f64, tolerance: f64 },

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("argument out of range: {0}")]
    Range(String),

    #[error("vector is not normalized: norm {0}")]
    Normalization(f64),

    #[error("numerical contract violated: {0}")]
    Accuracy(String),

    #[error("decomposition failed: {0}")]
    Decomposition(String),

    #[error("config error{}: {message}", location_suffix(.key, .line))]
    Config {
        message: String,
        key: Option<String>,
        line: Option<usize>,
    },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

fn location_suffix(key: &Option<String>, line: &Option<usize>) -> String {
    match (key, line) {
        (Some(k), Some(l)) => format!(" (key `{k}`, line {l})"),
        (Some(k), None) => format!(" (key `{k}`)"),
        (None, Some(l)) => format!(" (line {l})"),
        (None, None) => String::new(),
    }
}

impl Error {
    pub(crate) fn config(message: impl Into<String>) -> Self {
        Error::Config {
            message: message.into(),
            key: None,
            line: None,
        }
    }

    pub(crate) fn config_key(
        message: impl Into<String>,
        key: &str,
        line: Option<usize>,
    ) -> Self {
        Error::Config {
            message: message.into(),
            key: Some(key.to_string()),
            line,
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code associated with this error class.
    ///
    /// 2: configuration, 3: numerical contract, 4: I/O. Everything else is
    /// treated as a numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config { .. } => 2,
            Error::Io { .. } => 4,
            _ => 3,
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
