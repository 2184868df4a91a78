use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by the estimation pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error on {path}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed image: {0}")]
    MalformedImage(String),
    #[error("image of {width}x{height} exceeds the side limit {limit}")]
    ImageTooLarge {
        width: usize,
        height: usize,
        limit: usize,
    },
    #[error("image contains no black pixels")]
    EmptyImage,
    #[error("invalid IFS: {0}")]
    InvalidIfs(String),
    #[error("unknown preset '{0}'")]
    UnknownPreset(String),
    #[error("rasterization would visit {nodes} nodes, over the budget of {budget}")]
    NodeBudget { nodes: u128, budget: u128 },
    #[error("invalid radii schedule: {0}")]
    InvalidSchedule(String),
    #[error("malformed CSV: {0}")]
    MalformedCsv(String),
    #[error("index set J is empty after exclusions")]
    EmptyIndexSet,
    #[error("index k={0} is not available in the data")]
    MissingIndex(usize),
    #[error("degenerate design: {0}")]
    DegenerateDesign(String),
    #[error("series too short: {len} samples, need at least {min}")]
    SeriesTooShort { len: usize, min: usize },
    #[error("no significant period (peak/median ratio {ratio:.3} below {threshold})")]
    NoSignificantPeriod { ratio: f64, threshold: f64 },
    #[error("numeric failure: {0}")]
    Numeric(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("invalid error model: {0}")]
    InvalidErrorModel(String),
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
