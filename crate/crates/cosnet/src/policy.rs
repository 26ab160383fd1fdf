//! The shared policy: a recurrent comparison encoder (one LSTM cell) feeding
//! a two-layer action scorer with softmax, plus the exact analytic gradient
//! of the REINFORCE surrogate via backpropagation through time.
//!
//! Every agent runs the same parameters; only the recurrent state is
//! per-agent. Episodes are short (≤ 20 rounds), so the backward pass replays
//! the whole episode with no truncation.

use rand::Rng;

use crate::error::{Error, Result};
use crate::linalg::{add_assign, Mat};
use crate::num::Scalar;
use crate::types::RecurrentState;

/// Network dimensions: feature input D, recurrent width H, scorer width H₂,
/// and the number of actions |U|.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NetDims {
    pub input: usize,
    pub hidden: usize,
    pub hidden2: usize,
    pub actions: usize,
}

/// One gate of the recurrent cell.
#[derive(Clone, Debug, PartialEq)]
pub struct GateParams<T> {
    /// H×D input weights.
    pub w_x: Mat<T>,
    /// H×H recurrent weights.
    pub w_h: Mat<T>,
    /// H bias.
    pub bias: Vec<T>,
}

impl<T: Scalar> GateParams<T> {
    fn zeros(hidden: usize, input: usize) -> Self {
        GateParams {
            w_x: Mat::zeros(hidden, input),
            w_h: Mat::zeros(hidden, hidden),
            bias: vec![T::zero(); hidden],
        }
    }
}

/// All trainable weights, shared by every agent. Doubles as the container
/// for gradients and optimizer moments, which are parameter-shaped.
#[derive(Clone, Debug, PartialEq)]
pub struct PolicyParameters<T> {
    pub dims: NetDims,
    pub input_gate: GateParams<T>,
    pub forget_gate: GateParams<T>,
    pub cell_gate: GateParams<T>,
    pub output_gate: GateParams<T>,
    /// H₂×H first scorer layer.
    pub dense1_w: Mat<T>,
    pub dense1_b: Vec<T>,
    /// |U|×H₂ second scorer layer.
    pub dense2_w: Mat<T>,
    pub dense2_b: Vec<T>,
}

impl<T: Scalar> PolicyParameters<T> {
    pub fn zeros(dims: NetDims) -> Self {
        PolicyParameters {
            dims,
            input_gate: GateParams::zeros(dims.hidden, dims.input),
            forget_gate: GateParams::zeros(dims.hidden, dims.input),
            cell_gate: GateParams::zeros(dims.hidden, dims.input),
            output_gate: GateParams::zeros(dims.hidden, dims.input),
            dense1_w: Mat::zeros(dims.hidden2, dims.hidden),
            dense1_b: vec![T::zero(); dims.hidden2],
            dense2_w: Mat::zeros(dims.actions, dims.hidden2),
            dense2_b: vec![T::zero(); dims.actions],
        }
    }

    /// All tensors in the fixed order used by checkpoints and flat access:
    /// the four gates (input, forget, cell, output) as (w_x, w_h, bias),
    /// then dense1 weights/bias, then dense2 weights/bias.
    pub fn tensors(&self) -> Vec<&[T]> {
        vec![
            self.input_gate.w_x.as_slice(),
            self.input_gate.w_h.as_slice(),
            &self.input_gate.bias,
            self.forget_gate.w_x.as_slice(),
            self.forget_gate.w_h.as_slice(),
            &self.forget_gate.bias,
            self.cell_gate.w_x.as_slice(),
            self.cell_gate.w_h.as_slice(),
            &self.cell_gate.bias,
            self.output_gate.w_x.as_slice(),
            self.output_gate.w_h.as_slice(),
            &self.output_gate.bias,
            self.dense1_w.as_slice(),
            &self.dense1_b,
            self.dense2_w.as_slice(),
            &self.dense2_b,
        ]
    }

    pub fn tensors_mut(&mut self) -> Vec<&mut [T]> {
        vec![
            self.input_gate.w_x.as_mut_slice(),
            self.input_gate.w_h.as_mut_slice(),
            &mut self.input_gate.bias,
            self.forget_gate.w_x.as_mut_slice(),
            self.forget_gate.w_h.as_mut_slice(),
            &mut self.forget_gate.bias,
            self.cell_gate.w_x.as_mut_slice(),
            self.cell_gate.w_h.as_mut_slice(),
            &mut self.cell_gate.bias,
            self.output_gate.w_x.as_mut_slice(),
            self.output_gate.w_h.as_mut_slice(),
            &mut self.output_gate.bias,
            self.dense1_w.as_mut_slice(),
            &mut self.dense1_b,
            self.dense2_w.as_mut_slice(),
            &mut self.dense2_b,
        ]
    }

    pub fn param_count(&self) -> usize {
        self.tensors().iter().map(|t| t.len()).sum()
    }

    pub fn is_finite(&self) -> bool {
        self.tensors()
            .iter()
            .all(|t| t.iter().all(|v| v.is_finite()))
    }

    /// Σ ω² over every parameter.
    pub fn squared_norm(&self) -> T {
        self.tensors()
            .iter()
            .map(|t| t.iter().map(|&v| v * v).sum::<T>())
            .sum()
    }

    /// Reads the parameter at a global flat index (tensor order above).
    pub fn flat_get(&self, index: usize) -> T {
        let mut rest = index;
        for t in self.tensors() {
            if rest < t.len() {
                return t[rest];
            }
            rest -= t.len();
        }
        panic!("flat index {index} out of range");
    }

    /// Adds `delta` to the parameter at a global flat index.
    pub fn flat_add(&mut self, index: usize, delta: T) {
        let mut rest = index;
        for t in self.tensors_mut() {
            if rest < t.len() {
                t[rest] += delta;
                return;
            }
            rest -= t.len();
        }
        panic!("flat index {index} out of range");
    }
}

/// Fresh parameters: weights uniform in ±1/√fan_in, biases zero except the
/// forget gate's, which starts at 1 so early cells remember.
pub fn init_parameters<T: Scalar>(dims: NetDims, seed: u64) -> PolicyParameters<T> {
    assert!(
        dims.input > 0 && dims.hidden > 0 && dims.hidden2 > 0 && dims.actions > 0,
        "dimensions must be positive"
    );
    let mut rng = crate::rng::stream(seed, "policy-init");
    let mut params = PolicyParameters::zeros(dims);

    let fill = |mat: &mut Mat<T>, fan_in: usize, rng: &mut rand_chacha::ChaCha8Rng| {
        let bound = 1.0 / (fan_in as f64).sqrt();
        for w in mat.as_mut_slice() {
            *w = T::of((2.0 * rng.random::<f64>() - 1.0) * bound);
        }
    };

    for gate in [
        &mut params.input_gate,
        &mut params.forget_gate,
        &mut params.cell_gate,
        &mut params.output_gate,
    ] {
        fill(&mut gate.w_x, dims.input, &mut rng);
        fill(&mut gate.w_h, dims.hidden, &mut rng);
    }
    for b in &mut params.forget_gate.bias {
        *b = T::one();
    }
    fill(&mut params.dense1_w, dims.hidden, &mut rng);
    fill(&mut params.dense2_w, dims.hidden2, &mut rng);
    params
}

/// Softmax output over the action set, with matching log-probabilities.
#[derive(Clone, Debug)]
pub struct ActionDistribution<T> {
    probs: Vec<T>,
    log_probs: Vec<T>,
}

impl<T: Scalar> ActionDistribution<T> {
    /// Wraps probabilities, requiring them nonnegative and summing to
    /// 1 ± 1e-6.
    pub fn from_probs(probs: Vec<T>) -> Result<Self> {
        let sum: T = probs.iter().copied().sum();
        let off = (sum - T::one()).abs();
        if probs.iter().any(|p| !p.is_finite() || *p < T::zero()) || off > T::of(1e-6) {
            return Err(Error::NonFinite {
                quantity: "action probabilities",
            });
        }
        let log_probs = probs.iter().map(|&p| p.ln()).collect();
        Ok(ActionDistribution { probs, log_probs })
    }

    fn from_log_probs(log_probs: Vec<T>) -> Result<Self> {
        if log_probs.iter().any(|l| l.is_nan() || *l > T::zero()) {
            return Err(Error::NonFinite {
                quantity: "action probabilities",
            });
        }
        let probs: Vec<T> = log_probs.iter().map(|&l| l.exp()).collect();
        Ok(ActionDistribution { probs, log_probs })
    }

    pub fn probs(&self) -> &[T] {
        &self.probs
    }

    pub fn log_probs(&self) -> &[T] {
        &self.log_probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.probs.iter().enumerate() {
            if p > self.probs[best] {
                best = k;
            }
        }
        best
    }

    /// −Σ p log p, in nats.
    pub fn entropy(&self) -> T {
        let mut h = T::zero();
        for (&p, &l) in self.probs.iter().zip(&self.log_probs) {
            if p > T::zero() {
                h -= p * l;
            }
        }
        h
    }
}

/// Draws an action index from the distribution; returns it with its
/// log-probability. Deterministic given the rng state.
pub fn sample_action<T: Scalar>(
    dist: &ActionDistribution<T>,
    rng: &mut impl Rng,
) -> (usize, T) {
    let u = T::of(rng.random::<f64>());
    let mut acc = T::zero();
    for (k, &p) in dist.probs().iter().enumerate() {
        acc += p;
        if u < acc {
            return (k, dist.log_probs()[k]);
        }
    }
    // Rounding left the CDF a hair under 1; charge the last action.
    let last = dist.len() - 1;
    (last, dist.log_probs()[last])
}

/// Everything one forward step must remember for the backward pass.
struct StepCache<T> {
    x: Vec<T>,
    h_prev: Vec<T>,
    c_prev: Vec<T>,
    gate_i: Vec<T>,
    gate_f: Vec<T>,
    gate_g: Vec<T>,
    gate_o: Vec<T>,
    tanh_c: Vec<T>,
    hidden: Vec<T>,
    dense1_pre: Vec<T>,
    dense1_out: Vec<T>,
    probs: Vec<T>,
}

fn sigmoid<T: Scalar>(z: T) -> T {
    T::one() / (T::one() + (-z).exp())
}

fn gate_preact<T: Scalar>(gate: &GateParams<T>, x: &[T], h_prev: &[T]) -> Vec<T> {
    let mut z = gate.w_x.matvec(x);
    add_assign(&mut z, &gate.w_h.matvec(h_prev));
    add_assign(&mut z, &gate.bias);
    z
}

fn forward_cached<T: Scalar>(
    params: &PolicyParameters<T>,
    input: &[T],
    state: &RecurrentState<T>,
) -> Result<(StepCache<T>, ActionDistribution<T>, RecurrentState<T>)> {
    debug_assert_eq!(input.len(), params.dims.input);
    debug_assert_eq!(state.hidden.len(), params.dims.hidden);

    let gate_i: Vec<T> = gate_preact(&params.input_gate, input, &state.hidden)
        .into_iter()
        .map(sigmoid)
        .collect();
    let gate_f: Vec<T> = gate_preact(&params.forget_gate, input, &state.hidden)
        .into_iter()
        .map(sigmoid)
        .collect();
    let gate_g: Vec<T> = gate_preact(&params.cell_gate, input, &state.hidden)
        .into_iter()
        .map(|z| z.tanh())
        .collect();
    let gate_o: Vec<T> = gate_preact(&params.output_gate, input, &state.hidden)
        .into_iter()
        .map(sigmoid)
        .collect();

    let h = params.dims.hidden;
    let mut cell = Vec::with_capacity(h);
    for k in 0..h {
        cell.push(gate_f[k] * state.cell[k] + gate_i[k] * gate_g[k]);
    }
    let tanh_c: Vec<T> = cell.iter().map(|c| c.tanh()).collect();
    let hidden: Vec<T> = gate_o.iter().zip(&tanh_c).map(|(&o, &tc)| o * tc).collect();

    let mut dense1_pre = params.dense1_w.matvec(&hidden);
    add_assign(&mut dense1_pre, &params.dense1_b);
    let dense1_out: Vec<T> = dense1_pre
        .iter()
        .map(|&a| if a > T::zero() { a } else { T::zero() })
        .collect();

    let mut scores = params.dense2_w.matvec(&dense1_out);
    add_assign(&mut scores, &params.dense2_b);
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::NonFinite {
            quantity: "action scores",
        });
    }

    // Shift-stable softmax in log space.
    let max = scores.iter().copied().fold(T::neg_infinity(), T::max);
    let log_norm = scores
        .iter()
        .map(|&s| (s - max).exp())
        .sum::<T>()
        .ln();
    let log_probs: Vec<T> = scores.iter().map(|&s| s - max - log_norm).collect();
    let dist = ActionDistribution::from_log_probs(log_probs)?;

    let cache = StepCache {
        x: input.to_vec(),
        h_prev: state.hidden.clone(),
        c_prev: state.cell.clone(),
        gate_i,
        gate_f,
        gate_g,
        gate_o,
        tanh_c,
        hidden: hidden.clone(),
        dense1_pre,
        dense1_out,
        probs: dist.probs().to_vec(),
    };
    let next = RecurrentState { hidden, cell };
    Ok((cache, dist, next))
}

/// One recurrent step, then the scorer and softmax: the action distribution
/// and the agent's refreshed state.
pub fn forward<T: Scalar>(
    params: &PolicyParameters<T>,
    input: &[T],
    state: &RecurrentState<T>,
) -> Result<(ActionDistribution<T>, RecurrentState<T>)> {
    let (_, dist, next) = forward_cached(params, input, state)?;
    Ok((dist, next))
}

/// One agent's episode as REINFORCE needs it: chronological inputs, chosen
/// action indices, and per-round returns.
#[derive(Clone, Debug, PartialEq)]
pub struct AgentTape<T> {
    pub inputs: Vec<Vec<T>>,
    pub actions: Vec<usize>,
    pub returns: Vec<T>,
}

/// All agents of one sampled episode.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeTape<T> {
    pub agents: Vec<AgentTape<T>>,
}

/// Gradient of one episode's REINFORCE surrogate, −Σₐ Σₜ log π(uₜ|sₜ)·Rₜ,
/// with respect to the parameters. Callers average tapes and add their own
/// regularization. Replays each agent from a zero recurrent state, then
/// backpropagates through every round.
pub fn backward<T: Scalar>(
    params: &PolicyParameters<T>,
    tape: &EpisodeTape<T>,
) -> Result<PolicyParameters<T>> {
    let dims = params.dims;
    let mut grad = PolicyParameters::zeros(dims);

    for agent in &tape.agents {
        let rounds = agent.inputs.len();
        debug_assert_eq!(agent.actions.len(), rounds);
        debug_assert_eq!(agent.returns.len(), rounds);

        let mut caches = Vec::with_capacity(rounds);
        let mut state = RecurrentState::zeros(dims.hidden);
        for input in &agent.inputs {
            let (cache, _, next) = forward_cached(params, input, &state)?;
            caches.push(cache);
            state = next;
        }

        let mut dh_next = vec![T::zero(); dims.hidden];
        let mut dc_next = vec![T::zero(); dims.hidden];
        for t in (0..rounds).rev() {
            let cache = &caches[t];
            let ret = agent.returns[t];

            // d(−log p[a]·R)/dscores = (p − onehot(a))·R
            let mut dscores: Vec<T> = cache.probs.iter().map(|&p| p * ret).collect();
            dscores[agent.actions[t]] -= ret;

            grad.dense2_w.add_outer(&dscores, &cache.dense1_out);
            add_assign(&mut grad.dense2_b, &dscores);
            let dz1 = params.dense2_w.matvec_t(&dscores);

            let da1: Vec<T> = dz1
                .iter()
                .zip(&cache.dense1_pre)
                .map(|(&d, &a)| if a > T::zero() { d } else { T::zero() })
                .collect();
            grad.dense1_w.add_outer(&da1, &cache.hidden);
            add_assign(&mut grad.dense1_b, &da1);

            let mut dh = params.dense1_w.matvec_t(&da1);
            add_assign(&mut dh, &dh_next);

            let one = T::one();
            let h = dims.hidden;
            let mut dzi = Vec::with_capacity(h);
            let mut dzf = Vec::with_capacity(h);
            let mut dzg = Vec::with_capacity(h);
            let mut dzo = Vec::with_capacity(h);
            let mut dc_prev = Vec::with_capacity(h);
            for k in 0..h {
                let o = cache.gate_o[k];
                let i = cache.gate_i[k];
                let f = cache.gate_f[k];
                let g = cache.gate_g[k];
                let tc = cache.tanh_c[k];
                let d_o = dh[k] * tc;
                let dc = dh[k] * o * (one - tc * tc) + dc_next[k];
                dzo.push(d_o * o * (one - o));
                dzi.push(dc * g * i * (one - i));
                dzg.push(dc * i * (one - g * g));
                dzf.push(dc * cache.c_prev[k] * f * (one - f));
                dc_prev.push(dc * f);
            }

            let mut dh_prev = vec![T::zero(); h];
            for (gate, gate_grad, dz) in [
                (&params.input_gate, &mut grad.input_gate, &dzi),
                (&params.forget_gate, &mut grad.forget_gate, &dzf),
                (&params.cell_gate, &mut grad.cell_gate, &dzg),
                (&params.output_gate, &mut grad.output_gate, &dzo),
            ] {
                gate_grad.w_x.add_outer(dz, &cache.x);
                gate_grad.w_h.add_outer(dz, &cache.h_prev);
                add_assign(&mut gate_grad.bias, dz);
                add_assign(&mut dh_prev, &gate.w_h.matvec_t(dz));
            }

            dh_next = dh_prev;
            dc_next = dc_prev;
        }
    }

    if !grad.is_finite() {
        return Err(Error::NonFinite {
            quantity: "policy gradient",
        });
    }
    Ok(grad)
}

/// The value backward differentiates, averaged over tapes:
/// −(1/K)·Σₖ Σₐ Σₜ log π(uₜ|sₜ)·Rₜ + λ·Σ ω².
pub fn surrogate_loss<T: Scalar>(
    params: &PolicyParameters<T>,
    tapes: &[EpisodeTape<T>],
    lambda: T,
) -> Result<T> {
    let mut total = T::zero();
    for tape in tapes {
        for agent in &tape.agents {
            let mut state = RecurrentState::zeros(params.dims.hidden);
            for t in 0..agent.inputs.len() {
                let (dist, next) = forward(params, &agent.inputs[t], &state)?;
                total -= dist.log_probs()[agent.actions[t]] * agent.returns[t];
                state = next;
            }
        }
    }
    let k = T::of_usize(tapes.len().max(1));
    Ok(total / k + lambda * params.squared_norm())
}
