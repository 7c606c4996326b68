//! LSTM policy over node pairs and the REINFORCE estimator.

use rand::Rng;

use crate::error::{Result, VineError};
use crate::lineage::FitCache;
use crate::nn::{log_prob_grad, masked_softmax, sample_categorical, Lstm, LstmStep};
use crate::rl::env::{pair_slots, PolicyState, StepReward};

/// One sampled episode as the estimator sees it.
#[derive(Clone, Debug, Default)]
pub struct Trajectory {
    pub steps: Vec<LstmStep>,
    pub probs: Vec<Vec<f64>>,
    pub actions: Vec<usize>,
    pub rewards: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn log_prob(&self) -> f64 {
        self.probs.iter().zip(&self.actions).map(|(p, &a)| p[a].ln()).sum()
    }

    /// Discounted reward-to-go `G_t = sum_{t' >= t} gamma^{t'-t} R_t'`.
    pub fn returns(&self, gamma: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.rewards.len()];
        let mut acc = 0.0;
        for t in (0..self.rewards.len()).rev() {
            acc = self.rewards[t] + gamma * acc;
            out[t] = acc;
        }
        out
    }
}

/// Per-step exponentially weighted running mean of the returns.
#[derive(Clone, Debug)]
pub struct Baseline {
    values: Vec<f64>,
    seen: bool,
    decay: f64,
}

impl Baseline {
    pub fn new(steps: usize, decay: f64) -> Self {
        Self {
            values: vec![0.0; steps],
            seen: false,
            decay,
        }
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn fixed(values: Vec<f64>) -> Self {
        Self {
            values,
            seen: true,
            decay: 1.0,
        }
    }

    /// Folds in the mean return per step of one batch; the first batch
    /// sets the values outright.
    pub fn update(&mut self, trajectories: &[Trajectory], gamma: f64) {
        if trajectories.is_empty() {
            return;
        }
        let mut mean = vec![0.0; self.values.len()];
        for t in trajectories {
            for (m, g) in mean.iter_mut().zip(t.returns(gamma)) {
                *m += g / trajectories.len() as f64;
            }
        }
        for (v, m) in self.values.iter_mut().zip(mean) {
            *v = if self.seen {
                self.decay * *v + (1.0 - self.decay) * m
            } else {
                m
            };
        }
        self.seen = true;
    }
}

/// Gradient of `-J` averaged over `trajectories`, ready for a descent
/// step: `-(1/N) sum_i sum_t (G_t - b_t) grad ln pi(a_t | h_t)`.
pub fn policy_gradient(lstm: &Lstm, trajectories: &[Trajectory], baseline: &Baseline, gamma: f64) -> Result<Vec<f64>> {
    let mut grads = vec![0.0; lstm.params().len()];
    let scale = 1.0 / trajectories.len().max(1) as f64;
    for tr in trajectories {
        let dlogits: Vec<Vec<f64>> = tr
            .returns(gamma)
            .iter()
            .enumerate()
            .map(|(t, g)| {
                let adv = g - baseline.values.get(t).copied().unwrap_or(0.0);
                log_prob_grad(&tr.probs[t], tr.actions[t])
                    .into_iter()
                    .map(|x| -adv * scale * x)
                    .collect()
            })
            .collect();
        for (acc, g) in grads.iter_mut().zip(lstm.backward(&tr.steps, &dlogits)) {
            *acc += g;
        }
    }
    if grads.iter().any(|g| !g.is_finite()) {
        return Err(VineError::NonFiniteGradient);
    }
    Ok(grads)
}

/// Episode outcome: the estimator's view plus what was built.
pub struct Rollout {
    pub trajectory: Trajectory,
    pub step_rewards: Vec<StepReward>,
    pub pairs: Vec<Vec<(usize, usize)>>,
    pub initial_loglik: f64,
}

/// How actions are drawn from the policy.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Decode {
    Sample,
    Argmax,
}

/// Runs one episode on `cache`'s data.
pub fn rollout(
    lstm: &Lstm,
    cache: &FitCache,
    truncation: usize,
    lambda: f64,
    decode: Decode,
    rng: &mut impl Rng,
) -> Result<Rollout> {
    let mut state = PolicyState::new(cache, truncation);
    debug_assert_eq!(lstm.output_dim(), pair_slots(state.d()));
    let initial_loglik = state.initial_loglik();
    let mut h = lstm.initial_state();
    let mut trajectory = Trajectory::default();
    let mut step_rewards = Vec::with_capacity(state.episode_len());
    while !state.is_done() {
        let mask = state.action_mask();
        if !mask.iter().any(|&m| m) {
            return Err(VineError::EmptyActionSpace { level: state.level() });
        }
        let (next, step) = lstm.step(&state.observation(), &h)?;
        h = next;
        let probs = masked_softmax(&step.logits, &mask);
        let action = match decode {
            Decode::Sample => sample_categorical(&probs, rng),
            Decode::Argmax => argmax_masked(&probs, &mask),
        };
        let r = state.apply(action)?;
        trajectory.rewards.push(r.total(lambda));
        trajectory.steps.push(step);
        trajectory.probs.push(probs);
        trajectory.actions.push(action);
        step_rewards.push(r);
    }
    Ok(Rollout {
        trajectory,
        step_rewards,
        pairs: state.pairs().to_vec(),
        initial_loglik,
    })
}

fn argmax_masked(probs: &[f64], mask: &[bool]) -> usize {
    let mut best = (usize::MAX, f64::NEG_INFINITY);
    for (i, (&p, &ok)) in probs.iter().zip(mask).enumerate() {
        if ok && p > best.1 {
            best = (i, p);
        }
    }
    best.0
}
