//! Reward components, their mode-dependent combination, and discounted
//! returns.
//!
//! Unsupervised parts score the layout the round produced (centrality of
//! each focus within its neighborhood, diversity across foci). Supervised
//! parts score the change the round made, using per-frame key annotations.
//! Rewards exist only for rounds t ≥ 1: round 0 is the initial placement.

use std::fmt;
use std::str::FromStr;

use crate::env::{neighbor_clips, StepOutcome};
use crate::error::{Error, Result};
use crate::linalg::dot;
use crate::num::Scalar;
use crate::types::{ClipTrack, RewardBundle};

/// Which reward components drive training.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum RewardMode {
    /// Unsupervised and supervised combined.
    US,
    /// Unsupervised only (local + global).
    U,
    /// Supervised only (local + global).
    S,
    /// Local unsupervised only.
    LU,
    /// Global unsupervised only.
    GU,
    /// Local supervised only.
    LS,
    /// Global supervised only.
    GS,
}

impl RewardMode {
    pub const ALL: [RewardMode; 7] = [
        RewardMode::US,
        RewardMode::U,
        RewardMode::S,
        RewardMode::LU,
        RewardMode::GU,
        RewardMode::LS,
        RewardMode::GS,
    ];

    pub fn needs_annotations(self) -> bool {
        matches!(
            self,
            RewardMode::US | RewardMode::S | RewardMode::LS | RewardMode::GS
        )
    }

    fn needs_unsupervised(self) -> bool {
        matches!(
            self,
            RewardMode::US | RewardMode::U | RewardMode::LU | RewardMode::GU
        )
    }
}

impl fmt::Display for RewardMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

impl FromStr for RewardMode {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_uppercase().as_str() {
            "US" => Ok(RewardMode::US),
            "U" => Ok(RewardMode::U),
            "S" => Ok(RewardMode::S),
            "LU" => Ok(RewardMode::LU),
            "GU" => Ok(RewardMode::GU),
            "LS" => Ok(RewardMode::LS),
            "GS" => Ok(RewardMode::GS),
            other => Err(format!(
                "unknown reward mode {other:?}; expected one of US, U, S, LU, GU, LS, GS"
            )),
        }
    }
}

/// Scale factors, discount and mode for one training run.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardConfig<T> {
    /// Weight of the global part inside the unsupervised combination.
    pub alpha1: T,
    /// Weight of the skip term inside the local supervised reward.
    pub alpha2: T,
    /// Weight of the global part inside the supervised combination.
    pub alpha3: T,
    /// Weight of the unsupervised half in the combined mode.
    pub alpha4: T,
    /// Return discount per round.
    pub gamma: T,
    pub mode: RewardMode,
}

impl<T: Scalar> Default for RewardConfig<T> {
    fn default() -> Self {
        RewardConfig {
            alpha1: T::one(),
            alpha2: T::one(),
            alpha3: T::one(),
            alpha4: T::one(),
            gamma: T::of(0.9),
            mode: RewardMode::US,
        }
    }
}

/// Cosine of the angle between two feature vectors, clamped to [−1,1].
pub fn cosine_similarity<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    let na = dot(a, a);
    let nb = dot(b, b);
    if na == T::zero() || nb == T::zero() {
        return Err(Error::ZeroVector);
    }
    let cos = dot(a, b) / (na * nb).sqrt();
    Ok(cos.min(T::one()).max(-T::one()))
}

/// Minimum cosine between the agent's focus and its neighborhood, floored at
/// 0; an empty neighborhood scores 1 (vacuous centrality).
pub fn local_unsupervised<T: Scalar>(
    track: &ClipTrack<T>,
    positions: &[usize],
    agent: usize,
) -> Result<T> {
    let neighborhood = neighbor_clips(positions, agent, track.clip_count());
    if neighborhood.is_empty() {
        return Ok(T::one());
    }
    let focus = track.clip(positions[agent]);
    let mut min = T::infinity();
    for c in neighborhood {
        let cos = cosine_similarity(focus, track.clip(c))?;
        min = min.min(cos);
    }
    Ok(min.max(T::zero()))
}

/// One minus the mean cosine over ordered focus pairs, clamped to [0,1].
/// Shared by every agent in the round.
pub fn global_unsupervised<T: Scalar>(track: &ClipTrack<T>, positions: &[usize]) -> Result<T> {
    let n = positions.len();
    debug_assert!(n >= 2);
    let mut sum = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += cosine_similarity(track.clip(positions[i]), track.clip(positions[j]))?;
            }
        }
    }
    let mean = sum / T::of_usize(n * (n - 1));
    Ok((T::one() - mean).min(T::one()).max(T::zero()))
}

/// Change reward plus skip reward for one agent's move.
///
/// The change half pays for raising the key-frame share of the focus clip;
/// the skip half pays for not jumping over key frames. A move that skips
/// nothing keeps the full skip reward.
pub fn local_supervised<T: Scalar>(
    track: &ClipTrack<T>,
    old_pos: usize,
    new_pos: usize,
    skipped_clips: &[usize],
    alpha2: T,
) -> Result<T> {
    let mask = annotations(track, RewardMode::LS)?;
    let f_clip = T::of_usize(track.frames_per_clip);
    let new_key = T::of_usize(count_keys(track, mask, new_pos));
    let old_key = T::of_usize(count_keys(track, mask, old_pos));
    let change = T::of(0.25) * (T::one() + new_key / f_clip - old_key / f_clip);

    let mut skipped_frames = 0usize;
    let mut skipped_keys = 0usize;
    for &c in skipped_clips {
        skipped_frames += track.clip_frame_range(c).len();
        skipped_keys += count_keys(track, mask, c);
    }
    let skip_factor = if skipped_frames == 0 {
        T::one()
    } else {
        T::one() - T::of_usize(skipped_keys) / T::of_usize(skipped_frames)
    };
    Ok(change + T::of(0.5) * alpha2 * skip_factor)
}

/// Half plus half the change in the team's key-frame share between rounds.
/// Shared by every agent in the round.
pub fn global_supervised<T: Scalar>(
    track: &ClipTrack<T>,
    old_positions: &[usize],
    new_positions: &[usize],
) -> Result<T> {
    let mask = annotations(track, RewardMode::GS)?;
    debug_assert_eq!(old_positions.len(), new_positions.len());
    let budget = T::of_usize(old_positions.len() * track.frames_per_clip);
    let new_keys: usize = new_positions.iter().map(|&p| count_keys(track, mask, p)).sum();
    let old_keys: usize = old_positions.iter().map(|&p| count_keys(track, mask, p)).sum();
    Ok(T::of(0.5) * (T::one() + T::of_usize(new_keys) / budget - T::of_usize(old_keys) / budget))
}

/// Folds the populated components into `unsupervised`, `supervised` and
/// `total` according to the mode, and returns the total.
pub fn combine<T: Scalar>(bundle: &mut RewardBundle<T>, config: &RewardConfig<T>) -> Result<T> {
    let mode = config.mode;
    let half = T::of(0.5);
    let total = match mode {
        RewardMode::LU => require(bundle.local_unsupervised, mode, "local unsupervised")?,
        RewardMode::GU => require(bundle.global_unsupervised, mode, "global unsupervised")?,
        RewardMode::LS => require(bundle.local_supervised, mode, "local supervised")?,
        RewardMode::GS => require(bundle.global_supervised, mode, "global supervised")?,
        RewardMode::U => {
            let lu = require(bundle.local_unsupervised, mode, "local unsupervised")?;
            let gu = require(bundle.global_unsupervised, mode, "global unsupervised")?;
            let u = half * (lu + config.alpha1 * gu);
            bundle.unsupervised = Some(u);
            u
        }
        RewardMode::S => {
            let ls = require(bundle.local_supervised, mode, "local supervised")?;
            let gs = require(bundle.global_supervised, mode, "global supervised")?;
            let s = half * (ls + config.alpha3 * gs);
            bundle.supervised = Some(s);
            s
        }
        RewardMode::US => {
            let lu = require(bundle.local_unsupervised, mode, "local unsupervised")?;
            let gu = require(bundle.global_unsupervised, mode, "global unsupervised")?;
            let ls = require(bundle.local_supervised, mode, "local supervised")?;
            let gs = require(bundle.global_supervised, mode, "global supervised")?;
            let u = half * (lu + config.alpha1 * gu);
            let s = half * (ls + config.alpha3 * gs);
            bundle.unsupervised = Some(u);
            bundle.supervised = Some(s);
            half * (s + config.alpha4 * u)
        }
    };
    bundle.total = Some(total);
    Ok(total)
}

/// Rewards for one executed round, one bundle per agent in round-start
/// order. `prev_positions` is the layout the round started from.
pub fn round_rewards<T: Scalar>(
    track: &ClipTrack<T>,
    prev_positions: &[usize],
    outcome: &StepOutcome,
    config: &RewardConfig<T>,
) -> Result<Vec<RewardBundle<T>>> {
    let n = prev_positions.len();
    let mode = config.mode;
    if mode.needs_annotations() && track.annotations.is_none() {
        return Err(Error::MissingAnnotations { mode });
    }

    let global_u = if matches!(mode, RewardMode::US | RewardMode::U | RewardMode::GU) {
        Some(global_unsupervised(track, &outcome.sorted_positions)?)
    } else {
        None
    };
    let global_s = if matches!(mode, RewardMode::US | RewardMode::S | RewardMode::GS) {
        Some(global_supervised(
            track,
            prev_positions,
            &outcome.sorted_positions,
        )?)
    } else {
        None
    };

    let mut bundles = Vec::with_capacity(n);
    for i in 0..n {
        let mut bundle = RewardBundle {
            global_unsupervised: global_u,
            global_supervised: global_s,
            ..RewardBundle::default()
        };
        if mode.needs_unsupervised() && !matches!(mode, RewardMode::GU) {
            // Centrality is read off the layout the round produced, at this
            // agent's rank in the new ascending order.
            let rank = outcome
                .sorted_positions
                .binary_search(&outcome.destinations[i])
                .expect("destination present in sorted layout");
            bundle.local_unsupervised = Some(local_unsupervised(
                track,
                &outcome.sorted_positions,
                rank,
            )?);
        }
        if mode.needs_annotations() && !matches!(mode, RewardMode::GS) {
            bundle.local_supervised = Some(local_supervised(
                track,
                prev_positions[i],
                outcome.destinations[i],
                &outcome.skipped_clips[i],
                config.alpha2,
            )?);
        }
        combine(&mut bundle, config)?;
        bundles.push(bundle);
    }
    Ok(bundles)
}

/// Mean per-agent reward a layout realizes as a summary, used to rank
/// terminal configurations and by exhaustive search.
///
/// Unsupervised parts are the layout's own centrality and diversity, exactly
/// what a stay-still round earns. The supervised change terms would cancel
/// to a constant on a stay-still round, so they are scored against an empty
/// reference instead (no prior key frames, nothing skipped): coverage, not
/// change. That keeps supervised modes able to tell layouts apart.
pub fn stationary_reward<T: Scalar>(
    track: &ClipTrack<T>,
    positions: &[usize],
    config: &RewardConfig<T>,
) -> Result<T> {
    let mode = config.mode;
    let n = positions.len();
    let mut sorted = positions.to_vec();
    sorted.sort_unstable();

    let global_u = if matches!(mode, RewardMode::US | RewardMode::U | RewardMode::GU) {
        Some(global_unsupervised(track, &sorted)?)
    } else {
        None
    };
    let global_s = if matches!(mode, RewardMode::US | RewardMode::S | RewardMode::GS) {
        let mask = annotations(track, mode)?;
        let keys: usize = sorted.iter().map(|&p| count_keys(track, mask, p)).sum();
        let budget = T::of_usize(n * track.frames_per_clip);
        Some(T::of(0.5) * (T::one() + T::of_usize(keys) / budget))
    } else {
        None
    };

    let mut sum = T::zero();
    for i in 0..n {
        let mut bundle = RewardBundle {
            global_unsupervised: global_u,
            global_supervised: global_s,
            ..RewardBundle::default()
        };
        if mode.needs_unsupervised() && !matches!(mode, RewardMode::GU) {
            bundle.local_unsupervised = Some(local_unsupervised(track, &sorted, i)?);
        }
        if mode.needs_annotations() && !matches!(mode, RewardMode::GS) {
            let mask = annotations(track, mode)?;
            let keys = T::of_usize(count_keys(track, mask, sorted[i]));
            let f_clip = T::of_usize(track.frames_per_clip);
            bundle.local_supervised =
                Some(T::of(0.25) * (T::one() + keys / f_clip) + T::of(0.5) * config.alpha2);
        }
        sum += combine(&mut bundle, config)?;
    }
    Ok(sum / T::of_usize(n))
}

/// Discounted returns by reverse accumulation: R_t = r_t + γ·R_{t+1}.
pub fn discounted_returns<T: Scalar>(rewards: &[T], gamma: T) -> Vec<T> {
    let mut returns = vec![T::zero(); rewards.len()];
    let mut acc = T::zero();
    for t in (0..rewards.len()).rev() {
        acc = rewards[t] + gamma * acc;
        returns[t] = acc;
    }
    returns
}

fn annotations<T: Scalar>(track: &ClipTrack<T>, mode: RewardMode) -> Result<&[bool]> {
    track
        .annotations
        .as_deref()
        .ok_or(Error::MissingAnnotations { mode })
}

fn count_keys<T: Scalar>(track: &ClipTrack<T>, mask: &[bool], clip: usize) -> usize {
    track.clip_frame_range(clip).filter(|&f| mask[f]).count()
}

fn require<T>(value: Option<T>, mode: RewardMode, component: &'static str) -> Result<T> {
    value.ok_or(Error::MissingRewardComponent { mode, component })
}
