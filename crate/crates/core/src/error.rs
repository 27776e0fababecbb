use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("profile/game shape mismatch: {0}")]
    ShapeMismatch(String),

    #[error("invalid game dimensions: {0}")]
    InvalidDimensions(String),

    #[error("game too large: {players} players x {actions} actions needs {needed} payoff entries (cap {cap})")]
    GameTooLarge {
        players: usize,
        actions: usize,
        needed: String,
        cap: usize,
    },

    #[error("invalid mixed strategy: {0}")]
    InvalidStrategy(String),

    #[error("pool of {pool} points cannot supply {requested} selections")]
    PoolTooSmall { pool: usize, requested: usize },

    #[error("empty initialization batch")]
    EmptyBatch,

    #[error("maximin problem has no centers")]
    NoCenters,

    #[error("cannot aggregate an empty group")]
    EmptyGroup,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown algorithm `{0}` (valid: classic, macqueen-1, macqueen-2, maximin-u, maximin-s, fp++, k-means)")]
    UnknownAlgorithm(String),

    #[error("malformed game file {path}: {reason}")]
    MalformedGame { path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
