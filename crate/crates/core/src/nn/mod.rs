//! Small dense and recurrent networks with hand-derived gradients.
//!
//! Parameters live in one flat `Vec<f64>` per network so that optimizers
//! and gradient checks can treat every model alike.

mod adam;
mod fcnn;
mod lstm;

pub use adam::Adam;
pub use fcnn::{Fcnn, FcnnTrace};
pub use lstm::{Lstm, LstmState, LstmStep};

use rand::Rng;

/// Uniform in `[-1/sqrt(fan_in), 1/sqrt(fan_in)]`.
pub(crate) fn init_uniform(buf: &mut [f64], fan_in: usize, rng: &mut impl Rng) {
    let a = 1.0 / (fan_in.max(1) as f64).sqrt();
    for w in buf {
        *w = rng.gen_range(-a..=a);
    }
}

/// Softmax with masked entries (`-inf` logits) at exactly zero.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = logits.iter().map(|&z| (z - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Softmax over `logits` restricted to `mask`; masked entries are exactly 0.
pub fn masked_softmax(logits: &[f64], mask: &[bool]) -> Vec<f64> {
    let z: Vec<f64> = logits
        .iter()
        .zip(mask)
        .map(|(&z, &ok)| if ok { z } else { f64::NEG_INFINITY })
        .collect();
    softmax(&z)
}

/// Gradient of `ln p[action]` with respect to the logits, `e_a - p`.
pub fn log_prob_grad(probs: &[f64], action: usize) -> Vec<f64> {
    let mut g: Vec<f64> = probs.iter().map(|&p| -p).collect();
    g[action] += 1.0;
    g
}

/// Index drawn from a categorical distribution.
pub fn sample_categorical(probs: &[f64], rng: &mut impl Rng) -> usize {
    let r: f64 = rng.gen();
    let mut acc = 0.0;
    let mut last = 0;
    for (i, &p) in probs.iter().enumerate() {
        if p > 0.0 {
            acc += p;
            last = i;
            if r < acc {
                return i;
            }
        }
    }
    last
}
