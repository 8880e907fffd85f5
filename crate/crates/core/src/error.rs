use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    /// Too many malformed records in an input file.
    #[error("schema error in {path}: {rejected} of {total} records malformed (e.g. {samples})")]
    Schema {
        path: PathBuf,
        rejected: usize,
        total: usize,
        samples: String,
    },

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("degenerate fit: {0}")]
    DegenerateFit(String),

    #[error("series too short: need at least {needed} values, got {got}")]
    SeriesTooShort { needed: usize, got: usize },

    #[error("stage `{stage}` failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error("internal error: {0}")]
    Internal(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn in_stage(self, stage: &'static str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage,
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }

    /// Process exit code: 2 for data problems, 1 for bad usage/config, 3 for bugs.
    pub fn exit_code(&self) -> i32 {
        match self.root() {
            Error::Config(_) | Error::Parameter(_) => 1,
            Error::Internal(_) => 3,
            _ => 2,
        }
    }
}

pub(crate) trait StageExt<T> {
    fn stage(self, stage: &'static str) -> Result<T>;
}

impl<T> StageExt<T> for Result<T> {
    fn stage(self, stage: &'static str) -> Result<T> {
        self.map_err(|e| e.in_stage(stage))
    }
}
