//! Empirical marginal distribution with linear interpolation, mapping raw
//! columns to the copula scale and back.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Result, VineError};

const JITTER_SEED: u64 = 0x5e_ed0f_7135;

/// Strictly increasing order statistics of one column.
#[derive(Clone, Debug, PartialEq)]
pub struct MarginalModel {
    sorted: Vec<f64>,
}

impl MarginalModel {
    /// Ties are broken by uniform jitter of width `1e-9 * (max - min)`.
    pub fn fit(column: &[f64]) -> Result<Self> {
        if let Some(&bad) = column.iter().find(|x| !x.is_finite()) {
            return Err(VineError::Degenerate(format!("non-finite value {bad} in column")));
        }
        let mut sorted = column.to_vec();
        sorted.sort_unstable_by(f64::total_cmp);
        let (lo, hi) = match (sorted.first(), sorted.last()) {
            (Some(&lo), Some(&hi)) if hi > lo => (lo, hi),
            _ => {
                return Err(VineError::Degenerate(
                    "a margin needs at least 2 distinct values".into(),
                ))
            }
        };
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            let width = 1e-9 * (hi - lo);
            let mut rng = ChaCha8Rng::seed_from_u64(JITTER_SEED);
            for x in &mut sorted {
                *x += width * (rng.gen::<f64>() - 0.5);
            }
            sorted.sort_unstable_by(f64::total_cmp);
            for i in 1..sorted.len() {
                if sorted[i] <= sorted[i - 1] {
                    sorted[i] = sorted[i - 1].next_up();
                }
            }
        }
        Ok(Self { sorted })
    }

    /// Rebuilds a model from stored order statistics.
    pub fn from_sorted(sorted: Vec<f64>) -> Result<Self> {
        if sorted.len() < 2 || sorted.iter().any(|x| !x.is_finite()) {
            return Err(VineError::Degenerate(
                "stored margin needs at least 2 finite values".into(),
            ));
        }
        if sorted.windows(2).any(|w| w[0] >= w[1]) {
            return Err(VineError::Degenerate(
                "stored margin must be strictly increasing".into(),
            ));
        }
        Ok(Self { sorted })
    }

    pub fn sorted_values(&self) -> &[f64] {
        &self.sorted
    }

    pub fn n(&self) -> usize {
        self.sorted.len()
    }

    /// `(k + 1 + frac) / (n + 1)` where `sorted[k] <= x < sorted[k + 1]`;
    /// clamped to `[1/(n+1), n/(n+1)]`.
    pub fn transform(&self, x: f64) -> f64 {
        let s = &self.sorted;
        let n = s.len();
        let scale = (n + 1) as f64;
        if x <= s[0] {
            return 1.0 / scale;
        }
        if x >= s[n - 1] {
            return n as f64 / scale;
        }
        let k = s.partition_point(|&y| y <= x) - 1;
        let frac = (x - s[k]) / (s[k + 1] - s[k]);
        (k as f64 + 1.0 + frac) / scale
    }

    /// Linear interpolation of the order statistics; inverse of `transform`
    /// on its range.
    pub fn inverse(&self, u: f64) -> f64 {
        let s = &self.sorted;
        let n = s.len();
        let t = u * (n + 1) as f64 - 1.0;
        if !(t > 0.0) {
            return s[0];
        }
        if t >= (n - 1) as f64 {
            return s[n - 1];
        }
        let k = t.floor() as usize;
        let frac = t - k as f64;
        s[k] + frac * (s[k + 1] - s[k])
    }
}
