//! Turning terminal agent layouts into frame-level summaries and scoring
//! them: F-score against reference masks, exhaustive search over small
//! instances, and a synthetic planted-cluster generator for controlled
//! experiments.

use itertools::Itertools;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::reward::{stationary_reward, RewardConfig};
use crate::rng::stream;
use crate::train::EpisodeTrace;
use crate::types::ClipTrack;

/// Most combinations exhaustive search will enumerate before refusing.
pub const SEARCH_LIMIT: u128 = 1_000_000;

/// A clip-subset summary of one video.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Summary {
    /// Selected clip indices, ascending.
    pub clips: Vec<usize>,
    /// Frame-level mask, one flag per original frame; true exactly on the
    /// frames the selected clips cover.
    pub frame_mask: Vec<bool>,
}

/// Reads the summary off a finished episode: the clips under the agents at
/// termination, expanded to their frame spans.
pub fn extract_summary<T: Scalar>(trace: &EpisodeTrace<T>, track: &ClipTrack<T>) -> Summary {
    let mut clips = trace.final_positions.clone();
    clips.sort_unstable();
    let mut frame_mask = vec![false; track.frame_count];
    for &clip in &clips {
        for frame in track.clip_frame_range(clip) {
            frame_mask[frame] = true;
        }
    }
    Summary { clips, frame_mask }
}

/// Harmonic mean of precision and recall on frame masks, scaled to [0, 100].
///
/// Computed from the raw counts as 200 * overlap / (|generated| + |reference|),
/// which is algebraically the F-score and keeps round fractions exact.
pub fn f_score<T: Scalar>(generated: &[bool], reference: &[bool]) -> Result<T> {
    if generated.len() != reference.len() {
        return Err(Error::MaskLengthMismatch {
            generated: generated.len(),
            reference: reference.len(),
        });
    }
    let gen = generated.iter().filter(|&&b| b).count();
    let referenced = reference.iter().filter(|&&b| b).count();
    if referenced == 0 {
        return Err(Error::EmptyGroundTruth);
    }
    let overlap = generated
        .iter()
        .zip(reference)
        .filter(|&(&g, &r)| g && r)
        .count();
    if overlap == 0 {
        return Ok(T::zero());
    }
    Ok(T::of_usize(200 * overlap) / T::of_usize(gen + referenced))
}

/// Exhaustively scores every n-clip layout by its stationary reward and
/// returns the best one with its score. Ties keep the lexicographically
/// smallest layout. Refuses instances with more than [`SEARCH_LIMIT`]
/// combinations.
pub fn brute_force_best_positions<T: Scalar>(
    track: &ClipTrack<T>,
    agents: usize,
    config: &RewardConfig<T>,
) -> Result<(Vec<usize>, T)> {
    let m = track.clip_count();
    if agents < 2 || agents > m {
        return Err(Error::BadAgentLayout {
            clips: m,
            detail: format!("exhaustive search needs 2..={m} agents, got {agents}"),
        });
    }
    let combinations = binomial(m as u128, agents as u128);
    if combinations > SEARCH_LIMIT {
        return Err(Error::SearchSpaceTooLarge {
            combinations,
            limit: SEARCH_LIMIT,
        });
    }
    let mut best: Option<(Vec<usize>, T)> = None;
    for layout in (0..m).combinations(agents) {
        let score = stationary_reward(track, &layout, config)?;
        let better = match &best {
            None => true,
            Some((_, s)) => score > *s,
        };
        if better {
            best = Some((layout, score));
        }
    }
    Ok(best.expect("2 <= agents <= clips guarantees at least one layout"))
}

fn binomial(m: u128, n: u128) -> u128 {
    let n = n.min(m - n);
    let mut acc: u128 = 1;
    for i in 0..n {
        acc = acc.saturating_mul(m - i) / (i + 1);
        if acc > SEARCH_LIMIT {
            // Saturate early; callers only compare against the limit.
            return u128::MAX;
        }
    }
    acc
}

/// Recipe for a synthetic track with planted key clips.
#[derive(Debug, Clone)]
pub struct SyntheticSpec<T> {
    /// Total clips.
    pub clips: usize,
    /// Feature dimension, at least 2.
    pub dim: usize,
    /// Frames represented by each clip.
    pub frames_per_clip: usize,
    /// How many clips to plant on the key centroid.
    pub planted: usize,
    /// Separation between key and background centroids: their cosine
    /// similarity is 1 - margin before noise.
    pub margin: T,
    /// Standard deviation of per-coordinate Gaussian feature noise.
    pub noise: T,
    /// Drives centroid directions, planted positions, and noise.
    pub seed: u64,
}

/// Builds a planted-cluster track: clips cluster around one of two
/// centroids whose cosine similarity is exactly 1 - margin (before noise),
/// the planted clips carry the key centroid, and the annotation mask marks
/// exactly the planted clips' frames.
pub fn generate_synthetic<T: Scalar>(spec: &SyntheticSpec<T>) -> ClipTrack<T> {
    assert!(spec.clips >= 2, "need at least 2 clips");
    assert!(spec.dim >= 2, "need dim >= 2 to separate two centroids");
    assert!(spec.frames_per_clip >= 1);
    assert!(spec.planted <= spec.clips, "cannot plant more clips than exist");
    assert!(spec.margin.as_f64() > 0.0, "centroids must be separated");
    assert!(spec.noise.as_f64() >= 0.0);

    let mut rng = stream(spec.seed, "synthetic");
    let normal = StandardNormal;
    let gaussian = |d: usize, rng: &mut rand_chacha::ChaCha8Rng| -> Vec<f64> {
        (0..d).map(|_| normal.sample(rng)).collect()
    };

    let key = unit(gaussian(spec.dim, &mut rng));
    // Background centroid: rotate off the key direction by the margin angle,
    // using a unit vector orthogonal to the key.
    let ortho = {
        let raw = gaussian(spec.dim, &mut rng);
        let proj: f64 = raw.iter().zip(&key).map(|(r, k)| r * k).sum();
        unit(raw
            .iter()
            .zip(&key)
            .map(|(r, k)| r - proj * k)
            .collect())
    };
    let cos = (1.0 - spec.margin.as_f64()).clamp(-1.0, 1.0);
    let sin = (1.0 - cos * cos).max(0.0).sqrt();
    let background: Vec<f64> = key
        .iter()
        .zip(&ortho)
        .map(|(k, o)| cos * k + sin * o)
        .collect();

    let planted: Vec<usize> = {
        let mut p = rand::seq::index::sample(&mut rng, spec.clips, spec.planted).into_vec();
        p.sort_unstable();
        p
    };

    let mut features = crate::linalg::Mat::zeros(spec.clips, spec.dim);
    let mut is_planted = vec![false; spec.clips];
    for &p in &planted {
        is_planted[p] = true;
    }
    for clip in 0..spec.clips {
        let centroid = if is_planted[clip] { &key } else { &background };
        let noise = gaussian(spec.dim, &mut rng);
        for d in 0..spec.dim {
            features[(clip, d)] =
                T::of(centroid[d]) + spec.noise * T::of(noise[d]);
        }
    }

    let frame_count = spec.clips * spec.frames_per_clip;
    let mut annotations = vec![false; frame_count];
    for &p in &planted {
        for frame in p * spec.frames_per_clip..(p + 1) * spec.frames_per_clip {
            annotations[frame] = true;
        }
    }

    ClipTrack {
        features,
        frames_per_clip: spec.frames_per_clip,
        frame_count,
        annotations: Some(annotations),
        importance: None,
    }
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    assert!(norm > 0.0, "Gaussian draw collapsed to zero");
    v.into_iter().map(|x| x / norm).collect()
}
