//! Episode state for sequential edge selection. Each tree grows from one
//! edge outward: after the first edge of a level, every action joins a node
//! already in the tree to one outside it, so no state contains a cycle.

use std::sync::Arc;

use crate::error::{Result, VineError};
use crate::graph::DisjointSet;
use crate::lineage::{EdgeFit, FitCache};
use crate::vine::{adjacent, VineStructure};

/// Number of unordered node pairs over `d` nodes; the policy's output width.
pub fn pair_slots(d: usize) -> usize {
    d * (d - 1) / 2
}

/// Output slot of the pair `a < b` among `d` nodes.
pub fn pair_slot(d: usize, a: usize, b: usize) -> usize {
    debug_assert!(a < b && b < d);
    a * d - a * (a + 1) / 2 + (b - a - 1)
}

/// Inverse of [`pair_slot`].
pub fn slot_pair(d: usize, slot: usize) -> (usize, usize) {
    let mut rest = slot;
    for a in 0..d {
        let row = d - a - 1;
        if rest < row {
            return (a, a + 1 + rest);
        }
        rest -= row;
    }
    unreachable!("slot {slot} out of range for {d} nodes")
}

/// Reward of one action before weighting: the likelihood gain and the
/// complexity penalty (`-1` for a non-independence copula).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReward {
    pub likelihood: f64,
    pub penalty: f64,
}

impl StepReward {
    pub fn total(&self, lambda: f64) -> f64 {
        self.likelihood + lambda * self.penalty
    }
}

/// `(E_t, N^L, N^R)` plus the finished trees below the current level.
pub struct PolicyState<'c, 'd> {
    cache: &'c FitCache<'d>,
    d: usize,
    truncation: usize,
    level: usize,
    /// Nodes of the current level when it is above the first.
    below: Vec<Arc<EdgeFit>>,
    in_tree: Vec<bool>,
    edges: Vec<Arc<EdgeFit>>,
    /// Node pairs chosen so far, by level, in insertion order.
    pairs: Vec<Vec<(usize, usize)>>,
    trees: Vec<Vec<Arc<EdgeFit>>>,
    /// Proximity between current-level nodes, row-major.
    proximity: Vec<bool>,
    mean_log_u: &'c [f64],
    last: Option<(usize, usize)>,
}

impl<'c, 'd> PolicyState<'c, 'd> {
    /// Fresh episode over the cache's data, stopping after `truncation`
    /// trees (capped at `d - 1`).
    pub fn new(cache: &'c FitCache<'d>, truncation: usize) -> Self {
        let d = cache.data().ncols();
        Self {
            cache,
            d,
            truncation: truncation.clamp(1, d - 1),
            level: 1,
            below: Vec::new(),
            in_tree: vec![false; d],
            edges: Vec::new(),
            pairs: vec![Vec::new()],
            trees: Vec::new(),
            proximity: vec![true; d * d],
            mean_log_u: cache.mean_log_u(),
            last: None,
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn is_done(&self) -> bool {
        self.trees.len() == self.truncation
    }

    pub fn nodes(&self) -> usize {
        self.d - self.level + 1
    }

    /// Actions in one episode: `sum_{k <= K} (d - k)`.
    pub fn episode_len(&self) -> usize {
        (1..=self.truncation).map(|k| self.d - k).sum()
    }

    pub fn placed(&self) -> usize {
        self.trees.iter().map(Vec::len).sum::<usize>() + self.edges.len()
    }

    /// `L(x, s_0) = sum_v mean(ln u_v)`: every variable starts outside.
    pub fn initial_loglik(&self) -> f64 {
        self.mean_log_u.iter().sum()
    }

    fn proximate(&self, a: usize, b: usize) -> bool {
        self.proximity[a * self.nodes() + b]
    }

    /// Mask over the `pair_slots(d)` outputs.
    pub fn action_mask(&self) -> Vec<bool> {
        let m = self.nodes();
        let started = self.in_tree.iter().any(|&x| x);
        let mut mask = vec![false; pair_slots(self.d)];
        for a in 0..m {
            for b in a + 1..m {
                let crosses = !started || self.in_tree[a] != self.in_tree[b];
                if crosses && self.proximate(a, b) {
                    mask[pair_slot(self.d, a, b)] = true;
                }
            }
        }
        mask
    }

    /// Policy input: one-hot of the last action's two nodes, one-hot of the
    /// level and the fraction of edges placed; width `3d`.
    pub fn observation(&self) -> Vec<f64> {
        let d = self.d;
        let mut x = vec![0.0; 3 * d];
        if let Some((a, b)) = self.last {
            x[a] = 1.0;
            x[d + b] = 1.0;
        }
        x[2 * d + self.level - 1] = 1.0;
        x[3 * d - 1] = self.placed() as f64 / self.episode_len() as f64;
        x
    }

    /// Adds the edge in output slot `slot`.
    pub fn apply(&mut self, slot: usize) -> Result<StepReward> {
        if self.is_done() {
            return Err(VineError::EmptyActionSpace { level: self.level });
        }
        let (a, b) = slot_pair(self.d, slot);
        let m = self.nodes();
        let started = self.in_tree.iter().any(|&x| x);
        if b >= m || (started && self.in_tree[a] == self.in_tree[b]) || !self.proximate(a, b) {
            return Err(VineError::InvalidStructure(format!(
                "action ({a}, {b}) is outside the action space at level {}",
                self.level
            )));
        }
        let fit = if self.level == 1 {
            self.cache.leaf(a, b)?
        } else {
            self.cache
                .join(&self.below[a], &self.below[b])?
                .ok_or_else(|| VineError::InvalidStructure(format!("nodes {a} and {b} cannot be joined")))?
        };
        let n = self.cache.data().nrows() as f64;
        let mut likelihood = fit.loglik() / n;
        if self.level == 1 {
            for x in [a, b] {
                if !self.in_tree[x] {
                    likelihood -= self.mean_log_u[x];
                }
            }
        }
        let penalty = if fit.edge().copula().is_independence() {
            0.0
        } else {
            -1.0
        };
        self.in_tree[a] = true;
        self.in_tree[b] = true;
        self.edges.push(fit);
        self.pairs[self.level - 1].push((a, b));
        self.last = Some((a, b));
        debug_assert!(self.level_is_forest());
        if self.edges.len() == m - 1 {
            let done = std::mem::take(&mut self.edges);
            self.below = done.clone();
            self.trees.push(done);
            if !self.is_done() {
                self.level += 1;
                let m = self.nodes();
                self.in_tree = vec![false; m];
                self.proximity = (0..m * m)
                    .map(|x| adjacent(self.below[x / m].edge(), self.below[x % m].edge()))
                    .collect();
                self.pairs.push(Vec::new());
            }
        }
        Ok(StepReward { likelihood, penalty })
    }

    fn level_is_forest(&self) -> bool {
        let mut ds = DisjointSet::new(self.nodes());
        self.pairs[self.level - 1].iter().all(|&(a, b)| ds.union(a, b))
    }

    /// `L(x, s_t)`: fitted edge terms plus `mean(ln u_v)` for first-tree
    /// nodes not yet attached.
    pub fn loglik(&self) -> f64 {
        let n = self.cache.data().nrows() as f64;
        let edges: f64 = self.trees.iter().flatten().chain(&self.edges).map(|f| f.loglik()).sum();
        let outside: f64 = if self.level == 1 {
            (0..self.d)
                .filter(|&v| !self.in_tree[v])
                .map(|v| self.mean_log_u[v])
                .sum()
        } else {
            0.0
        };
        edges / n + outside
    }

    /// Node pairs chosen per level, in order.
    pub fn pairs(&self) -> &[Vec<(usize, usize)>] {
        &self.pairs
    }

    /// The finished trees with copulas fitted on the cache's data.
    pub fn structure(&self) -> VineStructure {
        let mut trees: Vec<_> = self
            .trees
            .iter()
            .map(|t| t.iter().map(|f| f.edge().clone()).collect())
            .collect();
        if !self.edges.is_empty() {
            trees.push(self.edges.iter().map(|f| f.edge().clone()).collect());
        }
        VineStructure::from_trees_unchecked(self.d, trees)
    }
}

/// Replays recorded node pairs through `cache`, returning the fitted
/// structure and its summed log-likelihood.
pub fn replay(cache: &FitCache, pairs: &[Vec<(usize, usize)>]) -> Result<(VineStructure, f64)> {
    let d = cache.data().ncols();
    let mut below: Vec<Arc<EdgeFit>> = Vec::new();
    let mut trees = Vec::with_capacity(pairs.len());
    let mut total = 0.0;
    for (k, level) in pairs.iter().enumerate() {
        let mut fits = Vec::with_capacity(level.len());
        for &(a, b) in level {
            let fit = if k == 0 {
                cache.leaf(a, b)?
            } else {
                cache
                    .join(&below[a], &below[b])?
                    .ok_or_else(|| VineError::InvalidStructure(format!("nodes {a} and {b} cannot be joined")))?
            };
            total += fit.loglik();
            fits.push(fit);
        }
        trees.push(fits.iter().map(|f| f.edge().clone()).collect());
        below = fits;
    }
    Ok((VineStructure::from_trees_unchecked(d, trees), total))
}
