//! Structure learning over flat vine vectors: a feed-forward network emits
//! one categorical head per slot and is trained with the score-function
//! estimator on a penalized log-likelihood.

use std::collections::HashSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::data::DataMatrix;
use crate::error::{Result, VineError};
use crate::fitting::check_fit_input;
use crate::graph::DisjointSet;
use crate::lineage::{EdgeFit, FitCache};
use crate::nn::{log_prob_grad, masked_softmax, sample_categorical, Adam, Fcnn};
use crate::vine::{adjacent, VineStructure};

/// Per level `k = 1..K`, `d - k + 1` slots; slot `i` holds `None` (not
/// connected) or the index of the node that node `i` connects to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VineVector {
    d: usize,
    slots: Vec<Vec<Option<usize>>>,
}

impl VineVector {
    pub fn new(d: usize, slots: Vec<Vec<Option<usize>>>) -> Result<Self> {
        if d < 2 || slots.is_empty() || slots.len() > d - 1 {
            return Err(VineError::Shape {
                expected: d.saturating_sub(1),
                found: slots.len(),
            });
        }
        for (idx, level) in slots.iter().enumerate() {
            let m = d - idx;
            if level.len() != m {
                return Err(VineError::Shape {
                    expected: m,
                    found: level.len(),
                });
            }
            for (i, s) in level.iter().enumerate() {
                if matches!(*s, Some(j) if j >= m || j == i) {
                    return Err(VineError::InvalidStructure(format!(
                        "slot {i} at level {} points to {s:?}",
                        idx + 1
                    )));
                }
            }
        }
        Ok(Self { d, slots })
    }

    /// Every slot unconnected.
    pub fn empty(d: usize, levels: usize) -> Self {
        Self {
            d,
            slots: (0..levels).map(|k| vec![None; d - k]).collect(),
        }
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn levels(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[Vec<Option<usize>>] {
        &self.slots
    }
}

/// Edges of a decoded vector with their fits and per-level cycle counts.
#[derive(Debug)]
pub struct Decoded {
    pub trees: Vec<Vec<Arc<EdgeFit>>>,
    /// Independent cycles plus dropped edges, per level.
    pub cycles: Vec<usize>,
}

impl Decoded {
    pub fn edge_count(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    pub fn loglik(&self) -> f64 {
        self.trees.iter().flatten().map(|f| f.loglik()).sum()
    }
}

/// Assembles the vector level by level. Nodes of level `k >= 2` are the
/// edges kept at level `k - 1`, in order. An edge whose endpoints do not
/// exist or violate proximity is dropped and counted as a cycle.
pub fn decode(vec: &VineVector, cache: &FitCache) -> Result<Decoded> {
    if cache.data().ncols() != vec.d {
        return Err(VineError::DimensionMismatch {
            expected: vec.d,
            found: cache.data().ncols(),
        });
    }
    let mut trees: Vec<Vec<Arc<EdgeFit>>> = Vec::with_capacity(vec.levels());
    let mut cycles = Vec::with_capacity(vec.levels());
    for (idx, level) in vec.slots.iter().enumerate() {
        let nodes = if idx == 0 { vec.d } else { trees[idx - 1].len() };
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        let mut dropped = 0;
        for (i, s) in level.iter().enumerate() {
            let Some(j) = *s else { continue };
            let key = (i.min(j), i.max(j));
            if !seen.insert(key) {
                continue;
            }
            if key.1 >= nodes {
                dropped += 1;
                continue;
            }
            let fit = if idx == 0 {
                Some(cache.leaf(key.0, key.1)?)
            } else {
                let below = &trees[idx - 1];
                cache.join(&below[key.0], &below[key.1])?
            };
            match fit {
                Some(f) => kept.push((key, f)),
                None => dropped += 1,
            }
        }
        let mut ds = DisjointSet::new(nodes);
        let mut redundant = 0;
        for &((a, b), _) in &kept {
            if !ds.union(a, b) {
                redundant += 1;
            }
        }
        cycles.push(redundant + dropped);
        trees.push(kept.into_iter().map(|k| k.1).collect());
    }
    Ok(Decoded { trees, cycles })
}

#[derive(Clone, Debug, PartialEq)]
pub struct VectorConfig {
    /// Cycle-penalty weight; `None` uses `d`.
    pub lambda: Option<f64>,
    /// Sparsity weight.
    pub mu: f64,
    /// Vectors sampled per step.
    pub samples: usize,
    pub epochs: usize,
    pub steps_per_epoch: usize,
    pub learning_rate: f64,
    pub hidden: Vec<usize>,
    pub input_dim: usize,
    /// Levels encoded; capped at `d - 1`.
    pub truncation: usize,
    /// Decay of the running-mean baseline.
    pub baseline_decay: f64,
    pub seed: u64,
}

impl Default for VectorConfig {
    fn default() -> Self {
        Self {
            lambda: None,
            mu: 1.0,
            samples: 16,
            epochs: 50,
            steps_per_epoch: 20,
            learning_rate: 0.01,
            hidden: vec![64, 64],
            input_dim: 16,
            truncation: usize::MAX,
            baseline_decay: 0.9,
            seed: 0,
        }
    }
}

/// `L - lambda sum_k C_k / k + mu / max(1, sum_k |E_k|)` with `L` the mean
/// log-likelihood per row.
pub fn objective_of(decoded: &Decoded, n: usize, lambda: f64, mu: f64) -> f64 {
    let penalty: f64 = decoded
        .cycles
        .iter()
        .enumerate()
        .map(|(k, &c)| c as f64 / (k + 1) as f64)
        .sum();
    decoded.loglik() / n as f64 - lambda * penalty + mu / decoded.edge_count().max(1) as f64
}

pub fn objective(vec: &VineVector, cache: &FitCache, lambda: f64, mu: f64) -> Result<f64> {
    Ok(objective_of(&decode(vec, cache)?, cache.data().nrows(), lambda, mu))
}

/// Turns a decoded vector into a valid vine: per level, the decoded edges
/// that fit the repaired level below are kept while they form a forest,
/// then the tree is completed with the highest-likelihood remaining edges.
pub fn repair(decoded: &Decoded, cache: &FitCache, levels: usize) -> Result<Vec<Vec<Arc<EdgeFit>>>> {
    let d = cache.data().ncols();
    let mut out: Vec<Vec<Arc<EdgeFit>>> = Vec::with_capacity(levels);
    for idx in 0..levels.min(d - 1) {
        let nodes = d - idx;
        let mut cands: Vec<((usize, usize), Arc<EdgeFit>)> = Vec::new();
        for a in 0..nodes {
            for b in a + 1..nodes {
                let fit = if idx == 0 {
                    Some(cache.leaf(a, b)?)
                } else {
                    let below = &out[idx - 1];
                    if adjacent(below[a].edge(), below[b].edge()) {
                        cache.join(&below[a], &below[b])?
                    } else {
                        None
                    }
                };
                cands.extend(fit.map(|f| ((a, b), f)));
            }
        }
        let wanted: Vec<_> = decoded
            .trees
            .get(idx)
            .map(|t| t.iter().map(|f| f.edge().clone()).collect())
            .unwrap_or_default();
        let rank = |c: &((usize, usize), Arc<EdgeFit>)| {
            let e = c.1.edge();
            let pos = wanted
                .iter()
                .position(|w| w.conditioned() == e.conditioned() && w.conditioning() == e.conditioning());
            (pos.is_none(), pos.unwrap_or(0))
        };
        cands.sort_by(|x, y| rank(x).cmp(&rank(y)).then(y.1.loglik().total_cmp(&x.1.loglik())));
        let mut ds = DisjointSet::new(nodes);
        let mut tree = Vec::with_capacity(nodes - 1);
        for ((a, b), f) in cands {
            if tree.len() == nodes - 1 {
                break;
            }
            if ds.union(a, b) {
                tree.push(f);
            }
        }
        out.push(tree);
    }
    Ok(out)
}

/// Per-slot categorical heads over one logit vector.
#[derive(Clone, Debug)]
pub struct Heads {
    /// `(offset, width, masked option)` per slot.
    slots: Vec<(usize, usize, Option<usize>)>,
}

impl Heads {
    /// Heads for vectors over `d` variables and `levels` levels; option 0 is
    /// "unconnected", option `1 + j` is node `j`, and a slot cannot name itself.
    pub fn for_vine(d: usize, levels: usize) -> Self {
        let mut slots = Vec::new();
        let mut off = 0;
        for k in 0..levels {
            let m = d - k;
            for i in 0..m {
                slots.push((off, m + 1, Some(1 + i)));
                off += m + 1;
            }
        }
        Self { slots }
    }

    pub fn new(widths: &[usize]) -> Self {
        let mut off = 0;
        let slots = widths
            .iter()
            .map(|&w| {
                let s = (off, w, None);
                off += w;
                s
            })
            .collect();
        Self { slots }
    }

    pub fn width(&self) -> usize {
        self.slots.last().map_or(0, |s| s.0 + s.1)
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn probs(&self, logits: &[f64]) -> Vec<Vec<f64>> {
        self.slots
            .iter()
            .map(|&(off, w, masked)| {
                let mask: Vec<bool> = (0..w).map(|o| Some(o) != masked).collect();
                masked_softmax(&logits[off..off + w], &mask)
            })
            .collect()
    }

    pub fn sample(&self, probs: &[Vec<f64>], rng: &mut impl Rng) -> Vec<usize> {
        probs.iter().map(|p| sample_categorical(p, rng)).collect()
    }

    /// Gradient of `-(1/N) sum_s (J_s - b) ln p(choice_s)` with respect to
    /// the logits.
    pub fn score_dlogits(&self, probs: &[Vec<f64>], draws: &[(Vec<usize>, f64)], baseline: f64) -> Vec<f64> {
        let mut g = vec![0.0; self.width()];
        let scale = 1.0 / draws.len().max(1) as f64;
        for (choice, value) in draws {
            let adv = (value - baseline) * scale;
            for (h, (&(off, _, _), &c)) in self.slots.iter().zip(choice).enumerate() {
                for (o, x) in log_prob_grad(&probs[h], c).into_iter().enumerate() {
                    g[off + o] -= adv * x;
                }
            }
        }
        g
    }
}

fn to_vector(d: usize, levels: usize, choice: &[usize]) -> VineVector {
    let mut it = choice.iter();
    let slots = (0..levels)
        .map(|k| (0..d - k).map(|_| it.next().and_then(|&c| c.checked_sub(1))).collect())
        .collect();
    VineVector { d, slots }
}

#[derive(Clone, Debug)]
pub struct VectorFit {
    pub structure: VineStructure,
    /// Objective of the returned (repaired) vine.
    pub objective: f64,
    /// Log-likelihood of the returned vine summed over rows.
    pub loglik: f64,
    /// Mean sampled objective per step.
    pub history: Vec<f64>,
    /// Fraction of sampled vectors with a cycle, per step.
    pub cycle_rate: Vec<f64>,
}

pub fn fit_vector(data: &DataMatrix, cfg: &VectorConfig) -> Result<VectorFit> {
    check_fit_input(data)?;
    let d = data.ncols();
    let n = data.nrows();
    let lambda = cfg.lambda.unwrap_or(d as f64);
    if !(lambda >= 0.0 && cfg.mu >= 0.0) || cfg.samples == 0 || cfg.truncation == 0 {
        return Err(VineError::Degenerate(
            "vector learner needs lambda, mu >= 0 and positive samples and truncation".into(),
        ));
    }
    let levels = cfg.truncation.min(d - 1);
    let heads = Heads::for_vine(d, levels);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let input: Vec<f64> = (0..cfg.input_dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut sizes = vec![cfg.input_dim];
    sizes.extend(&cfg.hidden);
    sizes.push(heads.width());
    let mut net = Fcnn::new(&sizes, &mut rng);
    let mut adam = Adam::new(net.params().len(), cfg.learning_rate);
    let cache = FitCache::new(data);
    let mut baseline: Option<f64> = None;
    let mut best: Option<(f64, Vec<Vec<Arc<EdgeFit>>>)> = None;
    let mut history = Vec::new();
    let mut cycle_rate = Vec::new();
    let mut streak = 0;
    let consider = |decoded: &Decoded, best: &mut Option<(f64, Vec<Vec<Arc<EdgeFit>>>)>| -> Result<()> {
        let trees = repair(decoded, &cache, levels)?;
        let fixed = Decoded {
            cycles: vec![0; trees.len()],
            trees,
        };
        let score = objective_of(&fixed, n, lambda, cfg.mu);
        if best.as_ref().is_none_or(|b| score > b.0) {
            *best = Some((score, fixed.trees));
        }
        Ok(())
    };

    for step in 0..cfg.epochs * cfg.steps_per_epoch {
        let trace = net.forward(&input)?;
        let probs = heads.probs(trace.logits());
        let choices: Vec<Vec<usize>> = (0..cfg.samples)
            .map(|s| {
                let mut r = ChaCha8Rng::seed_from_u64(cfg.seed);
                r.set_stream(1 + (step * cfg.samples + s) as u64);
                heads.sample(&probs, &mut r)
            })
            .collect();
        let scored: Vec<(Decoded, f64)> = choices
            .par_iter()
            .map(|c| {
                let dec = decode(&to_vector(d, levels, c), &cache)?;
                let j = objective_of(&dec, n, lambda, cfg.mu);
                Ok((dec, j))
            })
            .collect::<Result<_>>()?;
        if scored.iter().any(|s| !s.1.is_finite()) {
            streak += 1;
            if streak >= crate::rl::DIVERGENCE_STEPS {
                return Err(VineError::Divergence(streak));
            }
            continue;
        }
        streak = 0;
        let mean = scored.iter().map(|s| s.1).sum::<f64>() / scored.len() as f64;
        history.push(mean);
        cycle_rate
            .push(scored.iter().filter(|s| s.0.cycles.iter().any(|&c| c > 0)).count() as f64 / scored.len() as f64);
        let top = scored
            .iter()
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .expect("at least one sample");
        consider(&top.0, &mut best)?;

        let b = *baseline.get_or_insert(mean);
        let draws: Vec<(Vec<usize>, f64)> = choices.into_iter().zip(scored.iter().map(|s| s.1)).collect();
        let dlogits = heads.score_dlogits(&probs, &draws, b);
        let grads = net.backward(&trace, &dlogits);
        if grads.iter().any(|g| !g.is_finite()) {
            return Err(VineError::NonFiniteGradient);
        }
        adam.step(net.params_mut(), &grads)?;
        baseline = Some(cfg.baseline_decay * b + (1.0 - cfg.baseline_decay) * mean);
    }

    let trace = net.forward(&input)?;
    let mode: Vec<usize> = heads
        .probs(trace.logits())
        .iter()
        .map(|p| {
            p.iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map_or(0, |m| m.0)
        })
        .collect();
    consider(&decode(&to_vector(d, levels, &mode), &cache)?, &mut best)?;
    let (objective, trees) = best.expect("at least one candidate");
    let loglik = trees.iter().flatten().map(|f| f.loglik()).sum();
    let trees = trees
        .iter()
        .map(|t| t.iter().map(|f| f.edge().clone()).collect())
        .collect();
    Ok(VectorFit {
        structure: VineStructure::from_trees_unchecked(d, trees),
        objective,
        loglik,
        history,
        cycle_rate,
    })
}
