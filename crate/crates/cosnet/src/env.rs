//! Circular clip-world dynamics: neighbor resolution, sequential action
//! execution with collision push-through, and termination.

use crate::error::{Error, Result};
use crate::num::Scalar;
use crate::types::{check_layout, ClipTrack};

/// What one round of movement did, agent by agent.
///
/// Per-agent vectors are indexed by the round-start agent order; agents are
/// renumbered only once the round is over, via `sorted_positions`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StepOutcome {
    /// Where each agent ended up.
    pub destinations: Vec<usize>,
    /// Whether the agent's destination differs from its origin.
    pub moved: Vec<bool>,
    /// Clips traversed strictly between origin and destination, in walk
    /// order. Occupied clips count: their frames were passed over too.
    pub skipped_clips: Vec<Vec<usize>>,
    /// Whether the walk crossed the index wrap at least once.
    pub wrapped: Vec<bool>,
    /// Destinations re-sorted ascending: the next round's layout.
    pub sorted_positions: Vec<usize>,
}

/// Clips strictly between the left and right adjacent agents' foci along the
/// circle, excluding the agent's own focus. With two agents the other agent
/// is both neighbors and the whole remaining circle is walked.
pub fn neighbor_clips(positions: &[usize], agent: usize, clip_count: usize) -> Vec<usize> {
    let n = positions.len();
    debug_assert!(n >= 1 && agent < n);
    let focus = positions[agent];
    let left = positions[(agent + n - 1) % n];
    let right = positions[(agent + 1) % n];
    let mut out = Vec::new();
    let mut j = (left + 1) % clip_count;
    while j != right {
        if j != focus {
            out.push(j);
        }
        j = (j + 1) % clip_count;
    }
    out
}

/// Mean of five clip features: left agent's focus, the clip left of the own
/// focus, the own focus, the clip right of it, and the right agent's focus.
/// Coinciding clips are averaged with multiplicity.
pub fn five_clip_input<T: Scalar>(
    positions: &[usize],
    agent: usize,
    track: &ClipTrack<T>,
) -> Vec<T> {
    let n = positions.len();
    let m = track.clip_count();
    debug_assert!(n >= 1 && agent < n);
    let focus = positions[agent];
    let sources = [
        positions[(agent + n - 1) % n],
        (focus + m - 1) % m,
        focus,
        (focus + 1) % m,
        positions[(agent + 1) % n],
    ];
    let mut mean = vec![T::zero(); track.dim()];
    for j in sources {
        for (acc, &v) in mean.iter_mut().zip(track.clip(j)) {
            *acc += v;
        }
    }
    let five = T::of(5.0);
    for v in &mut mean {
        *v /= five;
    }
    mean
}

/// Executes one round of movement in ascending agent order.
///
/// A mover walks |step| clips in its signed direction, then keeps walking one
/// clip at a time while the landing clip is occupied. Positions stay frozen
/// in round-start order in the per-agent outputs; `sorted_positions` gives
/// the renumbered layout.
pub fn execute_round(positions: &[usize], steps: &[i32], clip_count: usize) -> Result<StepOutcome> {
    check_layout(positions, clip_count)?;
    let n = positions.len();
    if steps.len() != n {
        return Err(Error::BadAgentLayout {
            clips: clip_count,
            detail: format!("{} actions for {} agents", steps.len(), n),
        });
    }
    if n >= clip_count {
        return Err(Error::TooManyAgents {
            agents: n,
            clips: clip_count,
        });
    }

    let mut occupied = vec![false; clip_count];
    for &p in positions {
        occupied[p] = true;
    }

    let mut destinations = Vec::with_capacity(n);
    let mut moved = Vec::with_capacity(n);
    let mut skipped_clips = Vec::with_capacity(n);
    let mut wrapped = Vec::with_capacity(n);

    for (i, &step) in steps.iter().enumerate() {
        let origin = positions[i];
        if step == 0 {
            destinations.push(origin);
            moved.push(false);
            skipped_clips.push(Vec::new());
            wrapped.push(false);
            continue;
        }
        occupied[origin] = false; // the walk may lap the circle back home
        let forward = step > 0;
        let mut cur = origin;
        let mut crossed = false;
        let mut trail = Vec::new();
        for _ in 0..step.unsigned_abs() {
            cur = advance(cur, forward, clip_count, &mut crossed);
            trail.push(cur);
        }
        while occupied[cur] {
            cur = advance(cur, forward, clip_count, &mut crossed);
            trail.push(cur);
        }
        occupied[cur] = true;

        // Trail ends at the destination; skipped clips are the strictly
        // intermediate ones, deduplicated in first-visit order.
        trail.pop();
        let mut skipped = Vec::with_capacity(trail.len());
        for c in trail {
            if c != cur && !skipped.contains(&c) {
                skipped.push(c);
            }
        }

        destinations.push(cur);
        moved.push(cur != origin);
        skipped_clips.push(skipped);
        wrapped.push(crossed);
    }

    let mut sorted_positions = destinations.clone();
    sorted_positions.sort_unstable();
    debug_assert!(sorted_positions.windows(2).all(|w| w[0] < w[1]));

    Ok(StepOutcome {
        destinations,
        moved,
        skipped_clips,
        wrapped,
        sorted_positions,
    })
}

fn advance(cur: usize, forward: bool, clip_count: usize, crossed: &mut bool) -> usize {
    if forward {
        if cur + 1 == clip_count {
            *crossed = true;
            0
        } else {
            cur + 1
        }
    } else if cur == 0 {
        *crossed = true;
        clip_count - 1
    } else {
        cur - 1
    }
}

/// An episode ends when every agent stays still or the round cap is reached.
pub fn is_terminal(steps: &[i32], round: usize, max_rounds: usize) -> bool {
    steps.iter().all(|&s| s == 0) || round + 1 >= max_rounds
}
