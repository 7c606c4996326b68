//! Structure learning by sequential edge selection: an LSTM policy adds one
//! edge per step and is trained with REINFORCE on likelihood gains.

pub mod env;
pub mod policy;

use rand::seq::index::sample as sample_indices;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Result, VineError};
use crate::fitting::check_fit_input;
use crate::lineage::FitCache;
use crate::nn::{Adam, Lstm};
use crate::vine::VineStructure;

pub use env::{pair_slot, pair_slots, replay, slot_pair, PolicyState, StepReward};
pub use policy::{policy_gradient, rollout, Baseline, Decode, Rollout, Trajectory};

/// Consecutive non-finite epochs tolerated before training is abandoned.
pub const DIVERGENCE_STEPS: usize = 10;

/// Edge pairs chosen at each level, in insertion order.
type LevelPairs = Vec<Vec<(usize, usize)>>;

#[derive(Clone, Debug, PartialEq)]
pub struct RlConfig {
    /// Weight of the per-edge complexity penalty.
    pub lambda: f64,
    /// Discount in `(0, 1]`.
    pub gamma: f64,
    /// Rows per epoch; `None` or a value of at least `n` uses every row.
    pub batch_size: Option<usize>,
    /// Action sequences sampled per epoch.
    pub rollouts: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub hidden: usize,
    /// Trees to learn; capped at `d - 1`.
    pub truncation: usize,
    /// Decay of the running-mean baseline.
    pub baseline_decay: f64,
    pub seed: u64,
}

impl Default for RlConfig {
    fn default() -> Self {
        Self {
            lambda: 0.1,
            gamma: 0.95,
            batch_size: None,
            rollouts: 16,
            epochs: 3000,
            learning_rate: 1e-3,
            hidden: 32,
            truncation: usize::MAX,
            baseline_decay: 0.9,
            seed: 0,
        }
    }
}

impl RlConfig {
    fn check(&self) -> Result<()> {
        let bad = |what: &str| Err(VineError::Degenerate(format!("invalid RL configuration: {what}")));
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return bad("gamma must lie in (0, 1]");
        }
        if !(self.lambda >= 0.0) {
            return bad("lambda must be nonnegative");
        }
        if self.rollouts == 0 || self.epochs == 0 || self.hidden == 0 || self.truncation == 0 {
            return bad("rollouts, epochs, hidden and truncation must be positive");
        }
        if matches!(self.batch_size, Some(b) if b < 2) {
            return bad("batch size must be at least 2");
        }
        if !(self.learning_rate > 0.0) {
            return bad("learning rate must be positive");
        }
        Ok(())
    }
}

/// Result of [`fit_rl`]. Log-likelihoods are summed over the training rows.
#[derive(Clone, Debug)]
pub struct RlFit {
    /// Highest log-likelihood structure seen during training.
    pub structure: VineStructure,
    pub loglik: f64,
    /// Argmax decode of the final policy.
    pub decoded: VineStructure,
    pub decoded_loglik: f64,
    /// Mean sampled return of the first step, per epoch.
    pub history: Vec<f64>,
}

pub fn fit_rl(data: &DataMatrix, cfg: &RlConfig) -> Result<RlFit> {
    check_fit_input(data)?;
    cfg.check()?;
    let d = data.ncols();
    let n = data.nrows();
    let truncation = cfg.truncation.min(d - 1);
    let full = FitCache::new(data);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut lstm = Lstm::new(3 * d, cfg.hidden, pair_slots(d), &mut rng);
    let mut adam = Adam::new(lstm.params().len(), cfg.learning_rate);
    let steps: usize = (1..=truncation).map(|k| d - k).sum();
    let mut baseline = Baseline::new(steps, cfg.baseline_decay);
    let mut best: Option<(f64, LevelPairs)> = None;
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut streak = 0;
    let batch_rows = cfg.batch_size.filter(|&b| b < n);

    for epoch in 0..cfg.epochs {
        let subset = batch_rows.map(|b| {
            let mut idx = sample_indices(&mut rng, n, b).into_vec();
            idx.sort_unstable();
            data.select_rows(&idx)
        });
        let local = subset.as_ref().map(FitCache::new);
        let cache = local.as_ref().unwrap_or(&full);
        let rollouts: Vec<Rollout> = (0..cfg.rollouts)
            .into_par_iter()
            .map(|r| {
                let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
                rng.set_stream(1 + (epoch * cfg.rollouts + r) as u64);
                rollout(&lstm, cache, truncation, cfg.lambda, Decode::Sample, &mut rng)
            })
            .collect::<Result<_>>()?;
        let (trajectories, built): (Vec<Trajectory>, Vec<_>) = rollouts
            .into_iter()
            .map(|r| (r.trajectory, (r.step_rewards, r.pairs, r.initial_loglik)))
            .unzip();
        if trajectories.iter().flat_map(|t| &t.rewards).any(|r| !r.is_finite()) {
            streak += 1;
            if streak >= DIVERGENCE_STEPS {
                return Err(VineError::Divergence(streak));
            }
            continue;
        }
        streak = 0;
        let grads = policy_gradient(&lstm, &trajectories, &baseline, cfg.gamma)?;
        baseline.update(&trajectories, cfg.gamma);
        adam.step(lstm.params_mut(), &grads)?;
        history.push(trajectories.iter().map(|t| t.returns(cfg.gamma)[0]).sum::<f64>() / trajectories.len() as f64);

        for (rewards, pairs, initial) in built {
            let ll = if local.is_some() {
                replay(&full, &pairs)?.1
            } else {
                (rewards.iter().map(|s| s.likelihood).sum::<f64>() + initial) * n as f64
            };
            if best.as_ref().is_none_or(|b| ll > b.0) {
                best = Some((ll, pairs));
            }
        }
    }

    let greedy = rollout(&lstm, &full, truncation, cfg.lambda, Decode::Argmax, &mut rng)?;
    let (decoded, decoded_loglik) = replay(&full, &greedy.pairs)?;
    let (loglik, pairs) = match best {
        Some((ll, pairs)) if ll >= decoded_loglik => (ll, pairs),
        _ => (decoded_loglik, greedy.pairs),
    };
    let (structure, replayed) = replay(&full, &pairs)?;
    debug_assert!((replayed - loglik).abs() <= 1e-6 * (1.0 + loglik.abs()));
    Ok(RlFit {
        structure,
        loglik: replayed,
        decoded,
        decoded_loglik,
        history,
    })
}
