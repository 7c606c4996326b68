//! Synthetic data by conditional inversion along a breadth-first visit of
//! the first tree.
//!
//! A variable `x` may join the visited set `S` once some edge at level `|S|`
//! has complete union `S + {x}` with `x` in its conditioned pair. Its value
//! is then `u_{x|S}` pushed down through the inverse h-functions of the
//! chain `(x, s_m | D_m), (x, s_{m-1} | D_{m-1}), ..` to level 1.

use std::collections::{HashMap, VecDeque};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::copula::EPS;
use crate::data::DataMatrix;
use crate::error::{Result, VineError};
use crate::marginals::MarginalModel;
use crate::vine::{VineEdge, VineStructure};

/// Lookup of the edge with a given complete union whose conditioned pair
/// contains a given variable.
pub(crate) struct ChainIndex<'v> {
    vine: &'v VineStructure,
    by_union: HashMap<(Vec<usize>, usize), (usize, usize)>,
    neighbours: Vec<Vec<usize>>,
}

impl<'v> ChainIndex<'v> {
    /// `vine` must span all `d - 1` levels.
    pub(crate) fn new(vine: &'v VineStructure) -> Self {
        let mut by_union = HashMap::new();
        for (k, tree) in vine.trees().iter().enumerate() {
            for (m, e) in tree.iter().enumerate() {
                let (i, j) = e.conditioned();
                by_union.insert((e.union(), i), (k, m));
                by_union.insert((e.union(), j), (k, m));
            }
        }
        let mut neighbours = vec![Vec::new(); vine.d()];
        for e in vine.trees().first().into_iter().flatten() {
            let (i, j) = e.conditioned();
            neighbours[i].push(j);
            neighbours[j].push(i);
        }
        Self {
            vine,
            by_union,
            neighbours,
        }
    }

    fn edge(&self, union: &[usize], var: usize) -> Option<&'v VineEdge> {
        let &(k, m) = self.by_union.get(&(union.to_vec(), var))?;
        Some(&self.vine.trees()[k][m])
    }

    fn addable(&self, visited: &[usize], x: usize) -> bool {
        let mut u = visited.to_vec();
        u.push(x);
        u.sort_unstable();
        self.edge(&u, x).is_some()
    }

    /// Visit order from `start`: breadth-first over the first tree, taking
    /// the earliest queued variable that keeps the visited set joinable.
    pub(crate) fn visit_order(&self, start: usize, rng: &mut impl Rng) -> Vec<usize> {
        let d = self.vine.d();
        let mut order = vec![start];
        let mut seen = vec![false; d];
        seen[start] = true;
        let mut queue: VecDeque<usize> = VecDeque::new();
        let push_neighbours =
            |x: usize, queue: &mut VecDeque<usize>, seen: &mut Vec<bool>, rng: &mut dyn rand::RngCore| {
                let mut nb: Vec<usize> = self.neighbours[x].iter().copied().filter(|&y| !seen[y]).collect();
                nb.shuffle(rng);
                for y in nb {
                    seen[y] = true;
                    queue.push_back(y);
                }
            };
        push_neighbours(start, &mut queue, &mut seen, rng);
        while order.len() < d {
            let next = match queue.iter().position(|&x| self.addable(&order, x)) {
                Some(p) => queue.remove(p).expect("position is in range"),
                // a joinable variable always exists in a complete vine, but
                // it need not be adjacent in the first tree to a visited one
                None => {
                    let x = (0..d)
                        .find(|&x| !order.contains(&x) && self.addable(&order, x))
                        .expect("a complete vine always has a joinable variable");
                    if let Some(p) = queue.iter().position(|&y| y == x) {
                        queue.remove(p);
                    }
                    seen[x] = true;
                    x
                }
            };
            order.push(next);
            push_neighbours(next, &mut queue, &mut seen, rng);
        }
        order
    }

    /// Copula-scale values for one row given independent uniforms `w` and a
    /// joinable visit order.
    pub(crate) fn invert_row(&self, order: &[usize], w: &[f64]) -> Result<Vec<f64>> {
        let d = self.vine.d();
        let mut u = vec![f64::NAN; d];
        let mut memo: HashMap<(usize, Vec<usize>), f64> = HashMap::new();
        u[order[0]] = w[order[0]];
        for m in 1..order.len() {
            let x = order[m];
            let mut union: Vec<usize> = order[..=m].to_vec();
            union.sort_unstable();
            let mut p = w[x];
            // from the deepest edge down to the first tree
            while union.len() >= 2 {
                let e = self
                    .edge(&union, x)
                    .ok_or_else(|| VineError::InvalidStructure(format!("no edge joins variable {x} to {union:?}")))?;
                let (i, j) = e.conditioned();
                let s = if i == x { j } else { i };
                let given = self.conditional(s, e.conditioning(), &u, &mut memo)?;
                p = e.copula().hinv(p, given)?;
                union.retain(|&y| y != s);
            }
            u[x] = p;
        }
        Ok(u)
    }

    /// `u_{var|given}` from already sampled values, by forward h-functions.
    fn conditional(
        &self,
        var: usize,
        given: &[usize],
        u: &[f64],
        memo: &mut HashMap<(usize, Vec<usize>), f64>,
    ) -> Result<f64> {
        if given.is_empty() {
            return Ok(u[var]);
        }
        if let Some(&x) = memo.get(&(var, given.to_vec())) {
            return Ok(x);
        }
        let mut union = given.to_vec();
        union.push(var);
        union.sort_unstable();
        let e = self
            .edge(&union, var)
            .ok_or_else(|| VineError::InvalidStructure(format!("no edge conditions {var} on {given:?}")))?;
        let (i, j) = e.conditioned();
        let other = if i == var { j } else { i };
        let a = self.conditional(var, e.conditioning(), u, memo)?;
        let b = self.conditional(other, e.conditioning(), u, memo)?;
        let out = e.copula().hfunc(a, b).clamp(EPS, 1.0 - EPS);
        memo.insert((var, given.to_vec()), out);
        Ok(out)
    }
}

/// Generator for row `row` of a run seeded with `seed`.
fn row_rng(seed: u64, row: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(row as u64);
    rng
}

/// `n` rows on the copula scale. Row `r` depends only on `seed` and `r`.
pub fn sample_copula(v: &VineStructure, n: usize, seed: u64) -> Result<DataMatrix> {
    let full = v.completed();
    let index = ChainIndex::new(&full);
    let d = v.d();
    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|r| {
            let mut rng = row_rng(seed, r);
            let w: Vec<f64> = (0..d).map(|_| rng.gen_range(EPS..1.0 - EPS)).collect();
            let start = rng.gen_range(0..d);
            let order = index.visit_order(start, &mut rng);
            index.invert_row(&order, &w)
        })
        .collect::<Result<_>>()?;
    if n == 0 {
        return DataMatrix::from_columns(vec![Vec::new(); d]);
    }
    DataMatrix::from_rows(&rows)
}

/// `n` synthetic rows in original units.
pub fn sample(v: &VineStructure, marginals: &[MarginalModel], n: usize, seed: u64) -> Result<Vec<Vec<f64>>> {
    if marginals.len() != v.d() {
        return Err(VineError::DimensionMismatch {
            expected: v.d(),
            found: marginals.len(),
        });
    }
    let u = sample_copula(v, n, seed)?;
    Ok((0..n)
        .map(|r| {
            marginals
                .iter()
                .enumerate()
                .map(|(j, m)| m.inverse(u.col(j)[r]))
                .collect()
        })
        .collect())
}

/// Kolmogorov-Smirnov distance between a sample and Uniform(0, 1).
pub fn ks_uniform(values: &[f64]) -> f64 {
    let mut s = values.to_vec();
    s.sort_unstable_by(f64::total_cmp);
    let n = s.len() as f64;
    s.iter()
        .enumerate()
        .map(|(i, &u)| {
            let u = u.clamp(0.0, 1.0);
            ((i + 1) as f64 / n - u).max(u - i as f64 / n)
        })
        .fold(0.0, f64::max)
}

/// Per column, the KS distance of the samples pushed through their marginal.
pub fn uniformity_check(samples: &[Vec<f64>], marginals: &[MarginalModel]) -> Result<Vec<f64>> {
    let d = marginals.len();
    if let Some(bad) = samples.iter().find(|r| r.len() != d) {
        return Err(VineError::DimensionMismatch {
            expected: d,
            found: bad.len(),
        });
    }
    Ok(marginals
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let col: Vec<f64> = samples.iter().map(|r| m.transform(r[j])).collect();
            ks_uniform(&col)
        })
        .collect())
}
