use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid scene: {0}")]
    InvalidScene(String),

    #[error("invalid model spec: {0}")]
    InvalidSpec(String),

    #[error("unsupported scene format version {found} (expected {expected})")]
    UnsupportedVersion { found: u64, expected: u64 },

    #[error("failed to parse {what}: {source}")]
    Parse {
        what: String,
        #[source]
        source: serde_json::Error,
    },

    #[error("scene generation failed after {attempts} attempts: {reason}")]
    Generation { attempts: usize, reason: String },

    #[error("simulation diverged at step {step}: {reason}")]
    Divergence { step: u64, reason: String },

    #[error("path tracing exceeded {limit} segments in scene {scene_seed}")]
    PathCycle { limit: usize, scene_seed: u64 },

    #[error("statistics error: {0}")]
    Stats(String),

    #[error("bad input data: {0}")]
    Data(String),

    #[error("io error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
