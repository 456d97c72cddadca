use thiserror::Error;

use crate::features::Channel;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no training data")]
    NoTrainingData,

    #[error("invalid SOM configuration: {0}")]
    InvalidConfig(String),

    #[error("channel mismatch: expected {expected}, got {got}")]
    ChannelMismatch { expected: Channel, got: Channel },

    #[error("invalid object {id}: {reason}")]
    InvalidObject { id: String, reason: String },

    #[error("object unrepresentable: every channel gain is zero")]
    ObjectUnrepresentable,

    #[error("no collision-free hub seed found for {objects} objects")]
    HubCalibration { objects: usize },

    #[error("episodic memory full")]
    MemoryFull,

    #[error("cue has no clamped rows")]
    EmptyCue,

    #[error("object {0} already dropped")]
    AlreadyDropped(String),

    #[error("no candidate objects")]
    NoCandidates,

    #[error("order index {index} out of range ({available} orders)")]
    OrderIndex { index: usize, available: usize },

    #[error("line {line}: {message}")]
    Scenario { line: usize, message: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
