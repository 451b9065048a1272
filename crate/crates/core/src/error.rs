use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("configuration error at line {line}: {message}")]
    ConfigLine { line: usize, message: String },

    #[error("schema mismatch: {0}")]
    Schema(String),

    #[error("design matrix is rank deficient ({rank} of {cols} columns independent)")]
    Singular { rank: usize, cols: usize },

    #[error("inference unavailable: {0}")]
    InferenceUnavailable(String),

    #[error("did not converge: {0}")]
    Convergence(String),

    #[error("training diverged at epoch {epoch}: loss is not finite")]
    Divergence { epoch: usize },

    #[error("metric {metric} is undefined{}", replicate.map(|r| format!(" in replicate {r}")).unwrap_or_default())]
    UndefinedMetric {
        metric: &'static str,
        replicate: Option<usize>,
    },

    #[error("unsupported architecture: {0}")]
    UnsupportedArchitecture(String),

    #[error("unsupported feature: {0}")]
    UnsupportedFeature(String),

    #[error("problem too large: {0}")]
    Size(String),

    #[error("perturbation design is rank deficient: rank {rank} < {needed}")]
    Rank { rank: usize, needed: usize },

    #[error("class error: {0}")]
    Class(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("{stage}: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Wraps the error with the name of the pipeline stage that raised it.
    pub fn in_stage(self, stage: impl Into<String>) -> Self {
        Error::Stage {
            stage: stage.into(),
            source: Box::new(self),
        }
    }

    /// Process exit code: 1 usage/config, 2 I/O, 3 numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Stage { source, .. } => source.exit_code(),
            Error::Io { .. } => 2,
            Error::Singular { .. }
            | Error::Convergence(_)
            | Error::Divergence { .. }
            | Error::UndefinedMetric { .. }
            | Error::Rank { .. } => 3,
            _ => 1,
        }
    }
}
