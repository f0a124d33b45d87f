use std::path::Path;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("simulation diverged at t = {t:.6} s: {detail}")]
    Diverged { t: f64, detail: String },

    #[error("training aborted: {0}")]
    Training(String),

    #[error("checkpoint error: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Plugin(#[from] crate::plugin::PluginError),

    #[error("{context}: {source}")]
    Io {
        context: String,
        #[source]
        source: std::io::Error,
    },

    #[error("worker {worker} failed: {source}")]
    Worker {
        worker: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(context: impl Into<String>, source: std::io::Error) -> Self {
        Error::Io {
            context: context.into(),
            source,
        }
    }

    pub fn io_path(path: &Path, source: std::io::Error) -> Self {
        Error::io(path.display().to_string(), source)
    }

    /// Process exit code: 1 usage, 2 config, 3 runtime.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Usage(_) => 1,
            Error::Config(_) => 2,
            Error::Worker { source, .. } => source.exit_code(),
            _ => 3,
        }
    }
}
