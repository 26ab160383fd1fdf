//! Multi-agent reinforcement learning for video summarization.
//!
//! A video arrives as a matrix of per-clip feature vectors. A small team of
//! agents, all sharing one recurrent policy network, sits on distinct clips
//! of that circular sequence and moves in discrete steps. Each round every
//! agent observes a five-clip blend around its focus, picks a step from a
//! fixed menu, and the team is rewarded for parking on clips that are
//! locally representative, mutually diverse, and (when frame annotations
//! exist) rich in key frames. Training is plain policy-gradient over full
//! episodes; the clips under the agents at the end are the summary.
//!
//! The crate is generic over the float type ([`Scalar`] covers `f32` and
//! `f64`); the aliases below pin the concrete instantiations the command
//! line tool uses.

pub mod env;
pub mod error;
pub mod eval;
pub mod io;
pub mod linalg;
pub mod num;
pub mod policy;
pub mod reward;
pub mod rng;
pub mod train;
pub mod types;

pub use error::{Error, Result};
pub use num::Scalar;

/// Double-precision clip track, the representation the CLI trains on.
pub type ClipTrackF64 = types::ClipTrack<f64>;
/// Single-precision clip track, matching the on-disk feature format.
pub type ClipTrackF32 = types::ClipTrack<f32>;
/// Double-precision policy parameters.
pub type PolicyParametersF64 = policy::PolicyParameters<f64>;
/// Double-precision reward configuration.
pub type RewardConfigF64 = reward::RewardConfig<f64>;
/// Double-precision training configuration.
pub type TrainConfigF64 = train::TrainConfig<f64>;
/// Double-precision trainer.
pub type TrainerF64 = train::Trainer<f64>;
