//! Unified error type for validation, simulation, training and I/O.

use std::io;
use std::path::PathBuf;

use thiserror::Error;

use crate::reward::RewardMode;
use crate::types::TrackViolation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid track: {}", format_violations(.violations))]
    InvalidTrack { violations: Vec<TrackViolation> },

    #[error("track too short: 15% of {frame_count} frames does not cover one {frames_per_clip}-frame clip")]
    TrackTooShort {
        frame_count: usize,
        frames_per_clip: usize,
    },

    #[error("{agents} agents do not fit the {clips}-clip circle")]
    TooManyAgents { agents: usize, clips: usize },

    #[error("agent positions must be distinct, ascending and below {clips}: {detail}")]
    BadAgentLayout { clips: usize, detail: String },

    #[error("action space must contain the stay-still step and no duplicates")]
    BadActionSpace,

    #[error("cosine similarity is undefined for a zero vector")]
    ZeroVector,

    #[error("{mode} reward needs per-frame annotations the track does not carry")]
    MissingAnnotations { mode: RewardMode },

    #[error("{mode} reward bundle lacks its {component} component")]
    MissingRewardComponent {
        mode: RewardMode,
        component: &'static str,
    },

    #[error("non-finite {quantity}")]
    NonFinite { quantity: &'static str },

    #[error("feature dimension {got} does not match expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("update expects {expected} episode tapes, got {got}")]
    TapeCountMismatch { expected: usize, got: usize },

    #[error("mask length mismatch: generated {generated}, reference {reference}")]
    MaskLengthMismatch { generated: usize, reference: usize },

    #[error("ground-truth mask selects no frames")]
    EmptyGroundTruth,

    #[error("exhaustive search over {combinations} layouts exceeds the cap of {limit}")]
    SearchSpaceTooLarge { combinations: u128, limit: u128 },

    #[error("no tracks to train on")]
    EmptyDataset,

    #[error("config key {key:?} is not recognized")]
    UnknownConfigKey { key: String },

    #[error("config value {key}={value:?}: {detail}")]
    BadConfigValue {
        key: String,
        value: String,
        detail: String,
    },

    #[error("{}: {detail}", .path.display())]
    Corrupt { path: PathBuf, detail: String },

    #[error("{}: {source}", .path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub fn corrupt(path: impl Into<PathBuf>, detail: impl Into<String>) -> Self {
        Error::Corrupt {
            path: path.into(),
            detail: detail.into(),
        }
    }

    /// Stable machine-readable tag, used by the CLI's error JSON.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidTrack { .. } => "invalid_track",
            Error::TrackTooShort { .. } => "track_too_short",
            Error::TooManyAgents { .. } => "too_many_agents",
            Error::BadAgentLayout { .. } => "bad_agent_layout",
            Error::BadActionSpace => "bad_action_space",
            Error::ZeroVector => "zero_vector",
            Error::MissingAnnotations { .. } => "missing_annotations",
            Error::MissingRewardComponent { .. } => "missing_reward_component",
            Error::NonFinite { .. } => "non_finite",
            Error::DimensionMismatch { .. } => "dimension_mismatch",
            Error::TapeCountMismatch { .. } => "tape_count_mismatch",
            Error::MaskLengthMismatch { .. } => "mask_length_mismatch",
            Error::EmptyGroundTruth => "empty_ground_truth",
            Error::SearchSpaceTooLarge { .. } => "search_space_too_large",
            Error::EmptyDataset => "empty_dataset",
            Error::UnknownConfigKey { .. } => "unknown_config_key",
            Error::BadConfigValue { .. } => "bad_config_value",
            Error::Corrupt { .. } => "corrupt_file",
            Error::Io { .. } => "io",
        }
    }
}

fn format_violations(violations: &[TrackViolation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
