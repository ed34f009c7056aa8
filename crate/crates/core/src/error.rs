//! Crate-wide error type.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid catalog: {0}")]
    Catalog(String),

    #[error("invalid platform: {0}")]
    Platform(String),

    #[error("task {task} has no execution-time entry for pe type {pe_type}")]
    MissingExecEntry { task: usize, pe_type: usize },

    #[error("pe id {pe_id} out of range (platform has {num_pes} pes)")]
    PeOutOfRange { pe_id: usize, num_pes: usize },

    #[error("scheduler contract violation: {0}")]
    SchedulerContract(String),

    #[error("experience buffer misuse: {0}")]
    Buffer(String),

    #[error("checkpoint: {0}")]
    Checkpoint(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, SimError>;
