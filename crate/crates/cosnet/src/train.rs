//! Episode rollout and REINFORCE training: K sampled episodes per update,
//! gradient averaging with an L2 term, Adam steps, and the pass-over-dataset
//! schedule.

use rand::Rng;
use rayon::prelude::*;

use crate::env::{execute_round, five_clip_input, is_terminal};
use crate::error::{Error, Result};
use crate::eval;
use crate::num::Scalar;
use crate::policy::{
    backward, forward, init_parameters, sample_action, AgentTape, EpisodeTape, NetDims,
    PolicyParameters,
};
use crate::reward::{discounted_returns, round_rewards, RewardConfig};
use crate::rng::indexed_stream;
use crate::types::{
    max_agents, validate_track, ActionSpace, ClipTrack, RecurrentState, RewardBundle,
};

/// Everything one training run needs to know.
#[derive(Clone, Debug)]
pub struct TrainConfig<T> {
    /// K: sampled action sequences per parameter update.
    pub sequences_per_update: usize,
    /// Passes over the whole dataset.
    pub episodes_per_dataset: usize,
    /// Round cap per episode.
    pub max_rounds: usize,
    /// Adam step size η.
    pub learning_rate: T,
    /// L2 factor λ; enters the gradient as 2λω.
    pub l2_weight: T,
    pub reward: RewardConfig<T>,
    pub action_space: ActionSpace,
    /// Recurrent width H.
    pub hidden: usize,
    /// Scorer width H₂.
    pub hidden2: usize,
    /// Fixed agent count; `None` derives it from the 15% frame budget.
    pub agents: Option<usize>,
    /// Subtract a running mean-return baseline from every return.
    /// Off by default: plain score-function gradients.
    pub use_baseline: bool,
    pub seed: u64,
}

impl<T: Scalar> Default for TrainConfig<T> {
    fn default() -> Self {
        TrainConfig {
            sequences_per_update: 10,
            episodes_per_dataset: 5,
            max_rounds: 20,
            learning_rate: T::of(1e-4),
            l2_weight: T::one(),
            reward: RewardConfig::default(),
            action_space: ActionSpace::default(),
            hidden: 512,
            hidden2: 512,
            agents: None,
            use_baseline: false,
            seed: 0,
        }
    }
}

impl<T: Scalar> TrainConfig<T> {
    /// Agent count for a track: the explicit override, otherwise the frame
    /// budget's maximum, floored at 2 so neighbor structure exists.
    pub fn agent_count(&self, track: &ClipTrack<T>) -> Result<usize> {
        match self.agents {
            Some(n) => Ok(n.max(2)),
            None => Ok(max_agents(track.frame_count, track.frames_per_clip)?.max(2)),
        }
    }

    pub fn dims_for(&self, track: &ClipTrack<T>) -> NetDims {
        NetDims {
            input: track.dim(),
            hidden: self.hidden,
            hidden2: self.hidden2,
            actions: self.action_space.len(),
        }
    }
}

/// One executed round, bookkept per agent in tape order (the agent's index
/// at episode start; stable across re-sorting).
#[derive(Clone, Debug)]
pub struct RoundRecord<T> {
    /// Layout after the round, ascending.
    pub positions: Vec<usize>,
    pub actions: Vec<usize>,
    pub log_probs: Vec<T>,
    pub entropies: Vec<T>,
    pub rewards: Vec<RewardBundle<T>>,
}

/// Human-facing record of one episode.
#[derive(Clone, Debug)]
pub struct EpisodeTrace<T> {
    pub initial_positions: Vec<usize>,
    pub rounds: Vec<RoundRecord<T>>,
    /// Discounted returns per agent (tape order), per round.
    pub returns: Vec<Vec<T>>,
    pub final_positions: Vec<usize>,
    /// Mean over agents of the round-0 return.
    pub episode_return: T,
}

/// An episode both as a report (`trace`) and as training input (`tape`).
#[derive(Clone, Debug)]
pub struct Episode<T> {
    pub trace: EpisodeTrace<T>,
    pub tape: EpisodeTape<T>,
}

/// Rolls out one episode with sampled actions.
pub fn run_episode<T: Scalar>(
    track: &ClipTrack<T>,
    params: &PolicyParameters<T>,
    config: &TrainConfig<T>,
    rng: &mut impl Rng,
) -> Result<Episode<T>> {
    episode_impl(track, params, config, rng, false)
}

/// Rolls out one episode taking the most likely action each round. The rng
/// only places the initial layout.
pub fn greedy_episode<T: Scalar>(
    track: &ClipTrack<T>,
    params: &PolicyParameters<T>,
    config: &TrainConfig<T>,
    rng: &mut impl Rng,
) -> Result<Episode<T>> {
    episode_impl(track, params, config, rng, true)
}

fn episode_impl<T: Scalar>(
    track: &ClipTrack<T>,
    params: &PolicyParameters<T>,
    config: &TrainConfig<T>,
    rng: &mut impl Rng,
    greedy: bool,
) -> Result<Episode<T>> {
    let m = track.clip_count();
    let n = config.agent_count(track)?;
    if 2 * n > m {
        return Err(Error::TooManyAgents {
            agents: n,
            clips: m,
        });
    }
    if track.dim() != params.dims.input {
        return Err(Error::DimensionMismatch {
            expected: params.dims.input,
            got: track.dim(),
        });
    }

    // Distinct random starting clips, ascending; tape index i names the
    // agent that started at the i-th lowest position.
    let mut positions: Vec<usize> = rand::seq::index::sample(rng, m, n).into_vec();
    positions.sort_unstable();
    let initial_positions = positions.clone();
    // slot_agent[slot] = tape index of the agent currently at rank `slot`.
    let mut slot_agent: Vec<usize> = (0..n).collect();
    let mut states: Vec<RecurrentState<T>> =
        (0..n).map(|_| RecurrentState::zeros(params.dims.hidden)).collect();

    let mut rounds = Vec::new();
    let mut reward_seq: Vec<Vec<T>> = vec![Vec::new(); n];
    let mut tapes: Vec<AgentTape<T>> = (0..n)
        .map(|_| AgentTape {
            inputs: Vec::new(),
            actions: Vec::new(),
            returns: Vec::new(),
        })
        .collect();

    let mut round = 0;
    loop {
        let mut steps = Vec::with_capacity(n);
        let mut slot_actions = Vec::with_capacity(n);
        let mut slot_log_probs = Vec::with_capacity(n);
        let mut slot_entropies = Vec::with_capacity(n);
        for slot in 0..n {
            let agent = slot_agent[slot];
            let input = five_clip_input(&positions, slot, track);
            let (dist, next_state) = forward(params, &input, &states[agent])?;
            let (action, log_prob) = if greedy {
                let a = dist.argmax();
                (a, dist.log_probs()[a])
            } else {
                sample_action(&dist, rng)
            };
            states[agent] = next_state;
            steps.push(config.action_space.steps()[action]);
            slot_actions.push(action);
            slot_log_probs.push(log_prob);
            slot_entropies.push(dist.entropy());
            tapes[agent].inputs.push(input);
            tapes[agent].actions.push(action);
        }

        let outcome = execute_round(&positions, &steps, m)?;
        let bundles = round_rewards(track, &positions, &outcome, &config.reward)?;

        // Re-index the per-slot data by tape order for the record.
        let mut record = RoundRecord {
            positions: outcome.sorted_positions.clone(),
            actions: vec![0; n],
            log_probs: vec![T::zero(); n],
            entropies: vec![T::zero(); n],
            rewards: vec![RewardBundle::default(); n],
        };
        for slot in 0..n {
            let agent = slot_agent[slot];
            record.actions[agent] = slot_actions[slot];
            record.log_probs[agent] = slot_log_probs[slot];
            record.entropies[agent] = slot_entropies[slot];
            record.rewards[agent] = bundles[slot];
            reward_seq[agent].push(bundles[slot].total.expect("round_rewards fills total"));
        }
        rounds.push(record);

        // Agents are renumbered by their destinations' ascending order.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by_key(|&slot| outcome.destinations[slot]);
        slot_agent = order.iter().map(|&slot| slot_agent[slot]).collect();
        positions = outcome.sorted_positions;

        let done = is_terminal(&steps, round, config.max_rounds);
        round += 1;
        if done {
            break;
        }
    }

    let gamma = config.reward.gamma;
    let mut returns = Vec::with_capacity(n);
    for agent in 0..n {
        let r = discounted_returns(&reward_seq[agent], gamma);
        tapes[agent].returns = r.clone();
        returns.push(r);
    }
    let episode_return =
        returns.iter().map(|r| r[0]).sum::<T>() / T::of_usize(n);

    Ok(Episode {
        trace: EpisodeTrace {
            initial_positions,
            rounds,
            returns,
            final_positions: positions,
            episode_return,
        },
        tape: EpisodeTape { agents: tapes },
    })
}

/// What one parameter update reports back.
#[derive(Clone, Copy, Debug)]
pub struct UpdateReport<T> {
    /// Euclidean norm of the applied gradient (REINFORCE term plus L2).
    pub grad_norm: T,
    /// Mean episode return over the K episodes.
    pub mean_return: T,
}

/// The averaged update gradient: (1/K)·Σ episode gradients, plus 2λω.
/// `baseline` is subtracted from every return before differentiating.
pub fn accumulate_gradient<T: Scalar>(
    params: &PolicyParameters<T>,
    tapes: &[&EpisodeTape<T>],
    l2_weight: T,
    baseline: Option<T>,
) -> Result<PolicyParameters<T>> {
    let k = T::of_usize(tapes.len());
    let mut grad = PolicyParameters::zeros(params.dims);
    for &tape in tapes {
        let contribution = match baseline {
            None => backward(params, tape)?,
            Some(b) => {
                let shifted = EpisodeTape {
                    agents: tape
                        .agents
                        .iter()
                        .map(|a| AgentTape {
                            inputs: a.inputs.clone(),
                            actions: a.actions.clone(),
                            returns: a.returns.iter().map(|&r| r - b).collect(),
                        })
                        .collect(),
                };
                backward(params, &shifted)?
            }
        };
        for (acc, part) in grad.tensors_mut().into_iter().zip(contribution.tensors()) {
            for (a, &p) in acc.iter_mut().zip(part) {
                *a += p;
            }
        }
    }
    let two_lambda = T::of(2.0) * l2_weight;
    for (g, w) in grad.tensors_mut().into_iter().zip(params.tensors()) {
        for (gv, &wv) in g.iter_mut().zip(w) {
            *gv = *gv / k + two_lambda * wv;
        }
    }
    Ok(grad)
}

/// Adam with the standard published defaults (β₁=0.9, β₂=0.999, ε=1e-8).
#[derive(Clone, Debug)]
struct Adam<T> {
    m: PolicyParameters<T>,
    v: PolicyParameters<T>,
    step: u32,
    beta1: T,
    beta2: T,
    epsilon: T,
}

impl<T: Scalar> Adam<T> {
    fn new(dims: NetDims) -> Self {
        Adam {
            m: PolicyParameters::zeros(dims),
            v: PolicyParameters::zeros(dims),
            step: 0,
            beta1: T::of(0.9),
            beta2: T::of(0.999),
            epsilon: T::of(1e-8),
        }
    }

    fn apply(&mut self, params: &mut PolicyParameters<T>, grad: &PolicyParameters<T>, lr: T) {
        self.step += 1;
        let t = self.step as i32;
        let one = T::one();
        // Bias corrections folded into the step size.
        let lr_t = lr * (one - self.beta2.powi(t)).sqrt() / (one - self.beta1.powi(t));
        let (b1, b2, eps) = (self.beta1, self.beta2, self.epsilon);
        for (((w, g), m), v) in params
            .tensors_mut()
            .into_iter()
            .zip(grad.tensors())
            .zip(self.m.tensors_mut())
            .zip(self.v.tensors_mut())
        {
            for i in 0..w.len() {
                m[i] = b1 * m[i] + (one - b1) * g[i];
                v[i] = b2 * v[i] + (one - b2) * g[i] * g[i];
                w[i] = w[i] - lr_t * m[i] / (v[i].sqrt() + eps);
            }
        }
    }
}

/// Owns the parameters and optimizer state across updates.
#[derive(Clone, Debug)]
pub struct Trainer<T> {
    pub params: PolicyParameters<T>,
    pub config: TrainConfig<T>,
    opt: Adam<T>,
    baseline: Option<T>,
    updates_done: usize,
}

impl<T: Scalar> Trainer<T> {
    pub fn new(params: PolicyParameters<T>, config: TrainConfig<T>) -> Self {
        let opt = Adam::new(params.dims);
        let baseline = if config.use_baseline {
            Some(T::zero())
        } else {
            None
        };
        Trainer {
            params,
            config,
            opt,
            baseline,
            updates_done: 0,
        }
    }

    pub fn updates_done(&self) -> usize {
        self.updates_done
    }

    /// One REINFORCE update from exactly K episodes sampled under the
    /// current parameters. On any non-finite intermediate the parameters
    /// are left untouched and an error is returned.
    pub fn update(&mut self, episodes: &[Episode<T>]) -> Result<UpdateReport<T>> {
        let k = self.config.sequences_per_update;
        if episodes.len() != k {
            return Err(Error::TapeCountMismatch {
                expected: k,
                got: episodes.len(),
            });
        }
        for ep in episodes {
            let finite = ep
                .trace
                .rounds
                .iter()
                .flat_map(|r| r.rewards.iter())
                .flat_map(|b| b.components())
                .all(|v| v.is_finite());
            if !finite {
                return Err(Error::NonFinite {
                    quantity: "episode rewards",
                });
            }
        }

        let tapes: Vec<&EpisodeTape<T>> = episodes.iter().map(|e| &e.tape).collect();
        let grad =
            accumulate_gradient(&self.params, &tapes, self.config.l2_weight, self.baseline)?;
        let grad_norm = grad.squared_norm().sqrt();
        if !grad_norm.is_finite() {
            return Err(Error::NonFinite {
                quantity: "policy gradient",
            });
        }

        // Work on copies so a non-finite result leaves params and optimizer
        // exactly as they were.
        let opt_backup = self.opt.clone();
        let mut next = self.params.clone();
        self.opt.apply(&mut next, &grad, self.config.learning_rate);
        if !next.is_finite() {
            self.opt = opt_backup;
            return Err(Error::NonFinite {
                quantity: "updated parameters",
            });
        }
        self.params = next;
        self.updates_done += 1;

        let mean_return = episodes
            .iter()
            .map(|e| e.trace.episode_return)
            .sum::<T>()
            / T::of_usize(k);
        if let Some(b) = self.baseline.as_mut() {
            *b = T::of(0.9) * *b + T::of(0.1) * mean_return;
        }
        Ok(UpdateReport {
            grad_norm,
            mean_return,
        })
    }
}

/// A named track, as datasets are handed to training.
#[derive(Clone, Debug)]
pub struct Video<T> {
    pub id: String,
    pub track: ClipTrack<T>,
}

/// One row of the learning curve, per update.
#[derive(Clone, Debug)]
pub struct CurvePoint<T> {
    pub update_index: usize,
    pub video_id: String,
    pub mean_return: T,
    pub grad_norm: T,
    /// Greedy-rollout F-score against the track's annotations, when present.
    pub f_score: Option<T>,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub params: PolicyParameters<T>,
    pub curve: Vec<CurvePoint<T>>,
}

/// Full schedule: `episodes_per_dataset` passes over the dataset, one
/// update per video from K freshly sampled episodes. Reproducible down to
/// the bit for a fixed (dataset, config) pair.
pub fn train<T: Scalar>(dataset: &[Video<T>], config: &TrainConfig<T>) -> Result<TrainOutcome<T>> {
    let first = dataset.first().ok_or(Error::EmptyDataset)?;
    for video in dataset {
        let violations = validate_track(&video.track);
        if !violations.is_empty() {
            return Err(Error::InvalidTrack { violations });
        }
        if video.track.dim() != first.track.dim() {
            return Err(Error::DimensionMismatch {
                expected: first.track.dim(),
                got: video.track.dim(),
            });
        }
        if config.reward.mode.needs_annotations() && video.track.annotations.is_none() {
            return Err(Error::MissingAnnotations {
                mode: config.reward.mode,
            });
        }
    }

    let dims = config.dims_for(&first.track);
    let params = init_parameters(dims, config.seed);
    let mut trainer = Trainer::new(params, config.clone());
    let mut curve = Vec::new();
    let mut episode_counter: u64 = 0;
    let mut update_index = 0;

    for _pass in 0..config.episodes_per_dataset {
        for video in dataset {
            let k = config.sequences_per_update;
            let base = episode_counter;
            let episodes: Result<Vec<Episode<T>>> = (0..k)
                .into_par_iter()
                .map(|i| {
                    let mut rng = indexed_stream(config.seed, "episode", base + i as u64);
                    run_episode(&video.track, &trainer.params, config, &mut rng)
                })
                .collect();
            episode_counter += k as u64;
            let report = trainer.update(&episodes?)?;

            let f_score = if video.track.annotations.is_some() {
                let mut rng = indexed_stream(config.seed, "eval", update_index as u64);
                let episode = greedy_episode(&video.track, &trainer.params, config, &mut rng)?;
                let summary = eval::extract_summary(&episode.trace, &video.track);
                let mask = video.track.annotations.as_ref().expect("checked above");
                Some(eval::f_score::<T>(&summary.frame_mask, mask)?)
            } else {
                None
            };

            curve.push(CurvePoint {
                update_index,
                video_id: video.id.clone(),
                mean_return: report.mean_return,
                grad_norm: report.grad_norm,
                f_score,
            });
            update_index += 1;
        }
    }

    Ok(TrainOutcome {
        params: trainer.params,
        curve,
    })
}
