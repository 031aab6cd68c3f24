use thiserror::Error;

use crate::arm::Trajectory;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Coarse error category, used by front ends to pick exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Config,
    Data,
    Runtime,
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("format error at line {line}: {message}")]
    Format { line: usize, message: String },

    #[error("integrity error: {0}")]
    Integrity(String),

    #[error("size error: {0}")]
    Size(String),

    #[error("epoch for event {event} (onset sample {onset}) runs past the end of the recording")]
    Boundary { event: usize, onset: usize },

    #[error("protocol error in round {round}: {message}")]
    Protocol { round: usize, message: String },

    #[error("insufficient data in decision block {block}: bulb {bulb} has no surviving epochs")]
    InsufficientData { block: usize, bulb: u8 },

    #[error("training error: {0}")]
    Training(String),

    #[error("point ({x:.4}, {z:.4}) is outside the reachable workspace")]
    Workspace { x: f64, z: f64 },

    #[error("waypoint {waypoint} not reached within {max_steps} steps")]
    Convergence {
        waypoint: usize,
        max_steps: usize,
        partial: Box<Trajectory>,
    },

    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("{stage} stage failed{}: {source}", block.map(|b| format!(" (decision block {b})")).unwrap_or_default())]
    Stage {
        stage: &'static str,
        block: Option<usize>,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn config(msg: impl Into<String>) -> Self {
        Error::Config(msg.into())
    }

    pub fn size(msg: impl Into<String>) -> Self {
        Error::Size(msg.into())
    }

    /// Wrap an error with the pipeline stage (and optionally the decision block) it came from.
    pub fn at_stage(self, stage: &'static str, block: Option<usize>) -> Self {
        Error::Stage {
            stage,
            block,
            source: Box::new(self),
        }
    }

    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Config(_) => ErrorKind::Config,
            Error::Format { .. }
            | Error::Integrity(_)
            | Error::Size(_)
            | Error::Boundary { .. }
            | Error::Io(_)
            | Error::Json(_) => ErrorKind::Data,
            Error::Protocol { .. }
            | Error::InsufficientData { .. }
            | Error::Training(_)
            | Error::Workspace { .. }
            | Error::Convergence { .. }
            | Error::Numeric(_) => ErrorKind::Runtime,
            Error::Stage { source, .. } => source.kind(),
        }
    }
}
