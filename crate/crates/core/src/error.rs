use std::path::PathBuf;

use crate::graph::StateId;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch in {context}: expected {expected}, got {got}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        got: usize,
    },

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("model fault: {0}")]
    ModelFault(String),

    #[error("environment fault: {0}")]
    EnvFault(String),

    #[error("broken parent chain at state {0:?}")]
    BrokenParentChain(StateId),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("weight file layer {layer}: {message}")]
    LayerParse { layer: usize, message: String },

    #[error("validation error: {0}")]
    Validation(String),

    #[error("instance generation failed: {0}")]
    Generation(String),

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

pub(crate) fn check_dim(context: &'static str, expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimensionMismatch {
            context,
            expected,
            got,
        })
    }
}
