use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid map: {0}")]
    Map(String),

    #[error("invalid config: {0}")]
    Config(String),

    #[error("invalid personality fixture: {0}")]
    Fixture(String),

    #[error("invalid signal table: {0}")]
    SignalTable(String),

    #[error("opposing-group score requested in a single-group scenario")]
    NoOpposingGroup,

    #[error("plan {0:?} needs a social score for its relationship modifiers")]
    MissingSocialScore(crate::plans::PlanId),

    #[error("tile {0} is not in location memory")]
    UnknownTile(crate::hexgrid::HexCoord),

    #[error("corrupt run log at line {line}: {reason}")]
    CorruptLog { line: usize, reason: String },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

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

pub type Result<T> = std::result::Result<T, Error>;
