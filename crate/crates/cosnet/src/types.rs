//! Shared domain vocabulary: clip tracks, agent layouts, action sets and
//! per-round reward containers.

use std::fmt;
use std::ops::Range;

use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::num::Scalar;

pub const DEFAULT_FRAMES_PER_CLIP: usize = 16;

/// One video as a circular sequence of M clip feature vectors.
///
/// Clip j covers frames [j·f_clip, (j+1)·f_clip); the frame range of the
/// last clip may be cut short by `frame_count`, and frames beyond M·f_clip
/// belong to no clip.
#[derive(Clone, Debug, PartialEq)]
pub struct ClipTrack<T> {
    /// M×D clip features, one row per clip.
    pub features: Mat<T>,
    /// Frames represented by one clip.
    pub frames_per_clip: usize,
    /// Total frames in the source video.
    pub frame_count: usize,
    /// Per-frame key-frame mask, length `frame_count`.
    pub annotations: Option<Vec<bool>>,
    /// Per-frame importance scores in [0,1], length `frame_count`; kept when
    /// the annotation source was real-valued.
    pub importance: Option<Vec<T>>,
}

impl<T: Scalar> ClipTrack<T> {
    pub fn new(features: Mat<T>, frames_per_clip: usize, frame_count: usize) -> Self {
        ClipTrack {
            features,
            frames_per_clip,
            frame_count,
            annotations: None,
            importance: None,
        }
    }

    pub fn clip_count(&self) -> usize {
        self.features.rows()
    }

    pub fn dim(&self) -> usize {
        self.features.cols()
    }

    pub fn clip(&self, j: usize) -> &[T] {
        self.features.row(j)
    }

    /// Frames covered by clip j, clamped to the real frame count.
    pub fn clip_frame_range(&self, j: usize) -> Range<usize> {
        let start = j * self.frames_per_clip;
        let end = ((j + 1) * self.frames_per_clip).min(self.frame_count);
        start..end.max(start)
    }

    /// Annotated key frames inside clip j; `None` without annotations.
    pub fn key_frames_in_clip(&self, j: usize) -> Option<usize> {
        let mask = self.annotations.as_ref()?;
        Some(self.clip_frame_range(j).filter(|&f| mask[f]).count())
    }
}

/// A single structural defect found by [`validate_track`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrackViolation {
    TooFewClips { clips: usize },
    ZeroDim,
    ZeroFramesPerClip,
    NonFiniteFeature { clip: usize },
    ZeroNormClip { clip: usize },
    FrameCountTooLow { frame_count: usize, minimum: usize },
    AnnotationLength { len: usize, frame_count: usize },
    ImportanceLength { len: usize, frame_count: usize },
    ImportanceOutOfRange { frame: usize },
}

impl fmt::Display for TrackViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TrackViolation::TooFewClips { clips } => {
                write!(f, "need at least 2 clips, have {clips}")
            }
            TrackViolation::ZeroDim => write!(f, "feature dimension is 0"),
            TrackViolation::ZeroFramesPerClip => write!(f, "frames per clip is 0"),
            TrackViolation::NonFiniteFeature { clip } => {
                write!(f, "clip {clip} has a non-finite feature")
            }
            TrackViolation::ZeroNormClip { clip } => {
                write!(f, "clip {clip} has zero feature norm")
            }
            TrackViolation::FrameCountTooLow {
                frame_count,
                minimum,
            } => write!(
                f,
                "frame count {frame_count} below minimum {minimum} for the clip grid"
            ),
            TrackViolation::AnnotationLength { len, frame_count } => {
                write!(f, "annotation length {len} != frame count {frame_count}")
            }
            TrackViolation::ImportanceLength { len, frame_count } => {
                write!(f, "importance length {len} != frame count {frame_count}")
            }
            TrackViolation::ImportanceOutOfRange { frame } => {
                write!(f, "importance score at frame {frame} outside [0,1]")
            }
        }
    }
}

/// Checks every track invariant and reports all violations (empty = valid).
pub fn validate_track<T: Scalar>(track: &ClipTrack<T>) -> Vec<TrackViolation> {
    let mut report = Vec::new();
    let clips = track.clip_count();
    if clips < 2 {
        report.push(TrackViolation::TooFewClips { clips });
    }
    if track.dim() == 0 {
        report.push(TrackViolation::ZeroDim);
    }
    if track.frames_per_clip == 0 {
        report.push(TrackViolation::ZeroFramesPerClip);
    } else if clips >= 1 {
        // The last clip must own at least one frame; extra tail frames are fine.
        let minimum = clips * track.frames_per_clip - (track.frames_per_clip - 1);
        if track.frame_count < minimum {
            report.push(TrackViolation::FrameCountTooLow {
                frame_count: track.frame_count,
                minimum,
            });
        }
    }
    for j in 0..clips {
        let row = track.clip(j);
        if row.iter().any(|v| !v.is_finite()) {
            report.push(TrackViolation::NonFiniteFeature { clip: j });
        } else if row.iter().all(|v| *v == T::zero()) {
            report.push(TrackViolation::ZeroNormClip { clip: j });
        }
    }
    if let Some(mask) = &track.annotations {
        if mask.len() != track.frame_count {
            report.push(TrackViolation::AnnotationLength {
                len: mask.len(),
                frame_count: track.frame_count,
            });
        }
    }
    if let Some(scores) = &track.importance {
        if scores.len() != track.frame_count {
            report.push(TrackViolation::ImportanceLength {
                len: scores.len(),
                frame_count: track.frame_count,
            });
        }
        for (frame, s) in scores.iter().enumerate() {
            if !s.is_finite() || *s < T::zero() || *s > T::one() {
                report.push(TrackViolation::ImportanceOutOfRange { frame });
                break;
            }
        }
    }
    report
}

/// Largest agent count whose combined clip frames stay within 15% of the
/// track's frames. Exact integer arithmetic: N = ⌊3·f_total / (20·f_clip)⌋.
pub fn max_agents(frame_count: usize, frames_per_clip: usize) -> Result<usize> {
    assert!(frames_per_clip >= 1, "frames_per_clip must be positive");
    let n = 3 * frame_count / (20 * frames_per_clip);
    if n == 0 {
        return Err(Error::TrackTooShort {
            frame_count,
            frames_per_clip,
        });
    }
    Ok(n)
}

/// Recurrent state one agent carries across rounds.
#[derive(Clone, Debug, PartialEq)]
pub struct RecurrentState<T> {
    pub hidden: Vec<T>,
    pub cell: Vec<T>,
}

impl<T: Scalar> RecurrentState<T> {
    pub fn zeros(hidden_size: usize) -> Self {
        RecurrentState {
            hidden: vec![T::zero(); hidden_size],
            cell: vec![T::zero(); hidden_size],
        }
    }
}

/// Sorted, collision-free agent layout plus each agent's recurrent state.
#[derive(Clone, Debug)]
pub struct AgentConfiguration<T> {
    /// Distinct clip indices, ascending.
    pub positions: Vec<usize>,
    /// States aligned with `positions`.
    pub states: Vec<RecurrentState<T>>,
    /// Rounds executed so far.
    pub round: usize,
}

impl<T: Scalar> AgentConfiguration<T> {
    pub fn new(mut positions: Vec<usize>, clip_count: usize, hidden_size: usize) -> Result<Self> {
        positions.sort_unstable();
        check_layout(&positions, clip_count)?;
        let states = positions
            .iter()
            .map(|_| RecurrentState::zeros(hidden_size))
            .collect();
        Ok(AgentConfiguration {
            positions,
            states,
            round: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Restores ascending position order, carrying states along. Returns the
    /// permutation applied (`perm[new_slot] = old_slot`) so callers tracking
    /// agent identity can follow the move.
    pub fn resort(&mut self) -> Vec<usize> {
        let n = self.positions.len();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.sort_by_key(|&i| self.positions[i]);
        let positions = perm.iter().map(|&i| self.positions[i]).collect();
        let mut states: Vec<Option<RecurrentState<T>>> =
            self.states.drain(..).map(Some).collect();
        self.states = perm
            .iter()
            .map(|&i| states[i].take().expect("permutation is a bijection"))
            .collect();
        self.positions = positions;
        perm
    }
}

/// Errors unless positions are strictly ascending (hence distinct) and in range.
pub fn check_layout(positions: &[usize], clip_count: usize) -> Result<()> {
    if positions.is_empty() {
        return Err(Error::BadAgentLayout {
            clips: clip_count,
            detail: "no agents".into(),
        });
    }
    for (i, &p) in positions.iter().enumerate() {
        if p >= clip_count {
            return Err(Error::BadAgentLayout {
                clips: clip_count,
                detail: format!("position {p} out of range"),
            });
        }
        if i > 0 && positions[i - 1] >= p {
            return Err(Error::BadAgentLayout {
                clips: clip_count,
                detail: format!("positions not strictly ascending at index {i}"),
            });
        }
    }
    Ok(())
}

/// The discrete set of signed clip offsets an agent may choose from.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ActionSpace {
    steps: Vec<i32>,
}

impl ActionSpace {
    /// Builds from explicit steps; requires the stay-still step and no
    /// duplicates. Steps are kept in ascending order.
    pub fn from_steps(mut steps: Vec<i32>) -> Result<Self> {
        steps.sort_unstable();
        let distinct = steps.windows(2).all(|w| w[0] < w[1]);
        if !distinct || !steps.contains(&0) {
            return Err(Error::BadActionSpace);
        }
        Ok(ActionSpace { steps })
    }

    pub fn steps(&self) -> &[i32] {
        &self.steps
    }

    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    pub fn index_of(&self, step: i32) -> Option<usize> {
        self.steps.binary_search(&step).ok()
    }
}

impl Default for ActionSpace {
    /// Doubling strides up to 16 clips in both directions, plus stay-still.
    fn default() -> Self {
        ActionSpace {
            steps: vec![-16, -8, -4, -2, -1, 0, 1, 2, 4, 8, 16],
        }
    }
}

/// Per-agent, per-round reward components. Only the components the reward
/// mode produces are present; the rest stay `None` rather than zero.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RewardBundle<T> {
    pub local_unsupervised: Option<T>,
    pub global_unsupervised: Option<T>,
    pub unsupervised: Option<T>,
    pub local_supervised: Option<T>,
    pub global_supervised: Option<T>,
    pub supervised: Option<T>,
    pub total: Option<T>,
}

// Written out so an all-None bundle exists for any T, not only T: Default.
impl<T> Default for RewardBundle<T> {
    fn default() -> Self {
        RewardBundle {
            local_unsupervised: None,
            global_unsupervised: None,
            unsupervised: None,
            local_supervised: None,
            global_supervised: None,
            supervised: None,
            total: None,
        }
    }
}

impl<T: Scalar> RewardBundle<T> {
    pub fn components(&self) -> impl Iterator<Item = T> + '_ {
        [
            self.local_unsupervised,
            self.global_unsupervised,
            self.unsupervised,
            self.local_supervised,
            self.global_supervised,
            self.supervised,
            self.total,
        ]
        .into_iter()
        .flatten()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn track(m: usize, d: usize) -> ClipTrack<f64> {
        let features = Mat::from_fn(m, d, |r, c| (r * d + c + 1) as f64);
        ClipTrack::new(features, 16, m * 16)
    }

    #[test]
    fn well_formed_track_passes() {
        let t = track(10, 8);
        assert!(validate_track(&t).is_empty());
    }

    #[test]
    fn zero_norm_clip_is_named() {
        let mut t = track(5, 3);
        for c in 0..3 {
            t.features[(2, c)] = 0.0;
        }
        let report = validate_track(&t);
        assert_eq!(report, vec![TrackViolation::ZeroNormClip { clip: 2 }]);
    }

    #[test]
    fn annotation_length_mismatch_is_reported() {
        let mut t = track(5, 3);
        t.annotations = Some(vec![false; 10]);
        let report = validate_track(&t);
        assert_eq!(
            report,
            vec![TrackViolation::AnnotationLength {
                len: 10,
                frame_count: 80
            }]
        );
    }

    #[test]
    fn short_last_clip_is_allowed_but_not_shorter() {
        let mut t = track(5, 3);
        t.frame_count = 4 * 16 + 1; // last clip owns a single frame
        assert!(validate_track(&t).is_empty());
        t.frame_count = 4 * 16; // last clip owns nothing
        assert_eq!(validate_track(&t).len(), 1);
    }

    #[test]
    fn max_agents_matches_hand_computed_cases() {
        assert_eq!(max_agents(2500, 16).unwrap(), 23);
        assert_eq!(max_agents(160, 16).unwrap(), 1);
        assert_eq!(max_agents(19406, 16).unwrap(), 181);
    }

    #[test]
    fn max_agents_rejects_too_short_tracks() {
        // 15% of 106 frames is 15.9, below one 16-frame clip.
        assert!(matches!(
            max_agents(106, 16),
            Err(Error::TrackTooShort { .. })
        ));
    }

    #[test]
    fn max_agents_budget_is_tight() {
        for (f_total, f_clip) in [(2500usize, 16usize), (19406, 16), (640, 32), (4800, 48)] {
            let n = max_agents(f_total, f_clip).unwrap();
            assert!(20 * n * f_clip <= 3 * f_total);
            assert!(20 * (n + 1) * f_clip > 3 * f_total);
        }
    }

    #[test]
    fn resort_orders_positions_and_carries_states() {
        let mut cfg = AgentConfiguration::<f64>::new(vec![1, 4, 7], 10, 2).unwrap();
        cfg.states[0].hidden = vec![10.0, 10.0];
        cfg.states[1].hidden = vec![40.0, 40.0];
        cfg.states[2].hidden = vec![70.0, 70.0];
        cfg.positions = vec![9, 4, 0]; // as if agents moved
        let perm = cfg.resort();
        assert_eq!(cfg.positions, vec![0, 4, 9]);
        assert_eq!(perm, vec![2, 1, 0]);
        assert_eq!(cfg.states[0].hidden, vec![70.0, 70.0]);
        assert_eq!(cfg.states[2].hidden, vec![10.0, 10.0]);
    }

    #[test]
    fn resort_is_idempotent() {
        let mut cfg = AgentConfiguration::<f64>::new(vec![3, 1, 8], 10, 1).unwrap();
        cfg.resort();
        let before = cfg.positions.clone();
        cfg.resort();
        assert_eq!(cfg.positions, before);
    }

    #[test]
    fn action_space_default_shape() {
        let space = ActionSpace::default();
        assert_eq!(space.len(), 11);
        assert_eq!(space.index_of(0), Some(5));
        assert!(space.steps().iter().all(|s| s.abs() <= 16));
        let mirrored: Vec<i32> = space.steps().iter().rev().map(|s| -s).collect();
        assert_eq!(mirrored, space.steps());
    }

    #[test]
    fn action_space_requires_stay_still() {
        assert!(ActionSpace::from_steps(vec![-1, 1]).is_err());
        assert!(ActionSpace::from_steps(vec![0, 1, 1]).is_err());
        assert!(ActionSpace::from_steps(vec![2, 0, -2]).is_ok());
    }

    #[test]
    fn clip_frame_range_clamps_to_frame_count() {
        let mut t = track(5, 3);
        t.frame_count = 4 * 16 + 5;
        assert_eq!(t.clip_frame_range(0), 0..16);
        assert_eq!(t.clip_frame_range(4), 64..69);
    }
}
