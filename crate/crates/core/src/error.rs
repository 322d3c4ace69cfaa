use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("infeasible scenario: {0}")]
    InfeasibleScenario(String),

    #[error("no collision-free path from ({:.3}, {:.3}) to ({:.3}, {:.3})", .start.x, .start.y, .goal.x, .goal.y)]
    PlanningFailure {
        start: crate::geometry::Vec2,
        goal: crate::geometry::Vec2,
    },

    #[error("unknown sweep parameter `{0}`")]
    UnknownParameter(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Csv {
        path: PathBuf,
        #[source]
        source: csv::Error,
    },

    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;
