//! Pair-copula fits keyed by lineage. An edge's arguments depend on every
//! ancestor edge, so edges with equal labels but different ancestry are
//! fitted separately. Fits are deterministic, so concurrent inserts of the
//! same key are interchangeable.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use dashmap::DashMap;

use crate::copula::BivariateCopula;
use crate::data::DataMatrix;
use crate::error::Result;
use crate::fitting::select_pair;
use crate::vine::pseudo::h_column;
use crate::vine::{join, VineEdge};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Key {
    /// First-tree edge between two variables, smaller index first.
    Leaf(usize, usize),
    /// Join of two cached edges, smaller id first.
    Join(usize, usize),
}

/// A fitted edge and the conditional values it hands to the next tree.
#[derive(Debug)]
pub struct EdgeFit {
    id: usize,
    edge: VineEdge,
    loglik: f64,
    /// `(x, u_{x | union - x})` for both conditioned variables.
    outputs: [(usize, Vec<f64>); 2],
}

impl EdgeFit {
    pub fn edge(&self) -> &VineEdge {
        &self.edge
    }

    /// Log-likelihood summed over the cache's rows.
    pub fn loglik(&self) -> f64 {
        self.loglik
    }

    fn output(&self, var: usize) -> Option<&[f64]> {
        self.outputs.iter().find(|o| o.0 == var).map(|o| o.1.as_slice())
    }
}

pub struct FitCache<'a> {
    data: &'a DataMatrix,
    mean_log_u: Vec<f64>,
    map: DashMap<Key, Arc<EdgeFit>>,
    next_id: AtomicUsize,
}

impl<'a> FitCache<'a> {
    pub fn new(data: &'a DataMatrix) -> Self {
        let n = data.nrows() as f64;
        let mean_log_u = data
            .columns()
            .iter()
            .map(|c| c.iter().map(|u| u.ln()).sum::<f64>() / n)
            .collect();
        Self {
            data,
            mean_log_u,
            map: DashMap::new(),
            next_id: AtomicUsize::new(0),
        }
    }

    pub fn data(&self) -> &'a DataMatrix {
        self.data
    }

    /// Column means of `ln u`.
    pub fn mean_log_u(&self) -> &[f64] {
        &self.mean_log_u
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    fn fitted(&self, key: Key, edge: VineEdge, a: &[f64], b: &[f64]) -> Result<Arc<EdgeFit>> {
        let (copula, loglik) = select_pair(a, b)?;
        let (i, j) = edge.conditioned();
        let outputs = [(i, h_column(&copula, a, b)), (j, h_column(&copula, b, a))];
        let mut edge = edge;
        edge.set_copula(copula);
        let fit = Arc::new(EdgeFit {
            id: self.next_id.fetch_add(1, Ordering::Relaxed),
            edge,
            loglik,
            outputs,
        });
        Ok(self.map.entry(key).or_insert(fit).clone())
    }

    /// First-tree edge between variables `i != j`.
    pub fn leaf(&self, i: usize, j: usize) -> Result<Arc<EdgeFit>> {
        let key = Key::Leaf(i.min(j), i.max(j));
        if let Some(hit) = self.map.get(&key) {
            return Ok(hit.clone());
        }
        let edge = VineEdge::new(i, j, vec![], BivariateCopula::INDEPENDENCE);
        let (i, j) = edge.conditioned();
        self.fitted(key, edge, self.data.col(i), self.data.col(j))
    }

    /// Edge joining two cached edges of one level; `None` when they do not
    /// satisfy proximity or their conditional values cannot be paired.
    pub fn join(&self, a: &EdgeFit, b: &EdgeFit) -> Result<Option<Arc<EdgeFit>>> {
        let key = Key::Join(a.id.min(b.id), a.id.max(b.id));
        if let Some(hit) = self.map.get(&key) {
            return Ok(Some(hit.clone()));
        }
        if a.edge.level() != b.edge.level() {
            return Ok(None);
        }
        let Some(edge) = join(&a.edge, &b.edge, BivariateCopula::INDEPENDENCE) else {
            return Ok(None);
        };
        let (i, j) = edge.conditioned();
        let (ua, ub) = (a.edge.union(), b.edge.union());
        let arg = |x: usize| {
            if ua.contains(&x) && !ub.contains(&x) {
                a.output(x)
            } else if ub.contains(&x) && !ua.contains(&x) {
                b.output(x)
            } else {
                None
            }
        };
        match (arg(i), arg(j)) {
            (Some(u), Some(v)) => self.fitted(key, edge, u, v).map(Some),
            _ => Ok(None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fitting::fit_structure;
    use crate::sampler::sample_copula;
    use crate::vine::tests::five_dim_example;
    use crate::vine::vine_loglik;

    #[test]
    fn replaying_a_vine_matches_fit_structure() {
        let truth = five_dim_example();
        let mut truth = truth;
        for (k, tree) in truth.trees_mut().iter_mut().enumerate() {
            for e in tree.iter_mut() {
                let t = if k == 0 { 2.0 } else { 1.2 };
                e.set_copula(BivariateCopula::new(crate::CopulaFamily::Clayton, t).unwrap());
            }
        }
        let data = sample_copula(&truth, 400, 9).unwrap();
        let fitted = fit_structure(&truth, &data).unwrap();
        let cache = FitCache::new(&data);
        let mut prev: Vec<Arc<EdgeFit>> = Vec::new();
        let mut total = 0.0;
        for (k, tree) in truth.trees().iter().enumerate() {
            let mut level = Vec::new();
            for e in tree {
                let f = if k == 0 {
                    let (i, j) = e.conditioned();
                    cache.leaf(i, j).unwrap()
                } else {
                    let [ni, nj] = e.node_unions();
                    let find = |u: &Vec<usize>| prev.iter().find(|p| &p.edge().union() == u).unwrap();
                    cache.join(find(&ni), find(&nj)).unwrap().unwrap()
                };
                let want = fitted
                    .find(e.conditioned().0, e.conditioned().1, e.conditioning())
                    .unwrap();
                assert_eq!(f.edge(), want);
                total += f.loglik();
                level.push(f);
            }
            prev = level;
        }
        assert!((total - vine_loglik(&fitted, &data).unwrap()).abs() < 1e-9);
        let before = cache.len();
        cache.leaf(3, 0).unwrap();
        assert_eq!(cache.len(), before);
    }

    #[test]
    fn non_adjacent_edges_do_not_join() {
        let data = sample_copula(&five_dim_example(), 50, 1).unwrap();
        let cache = FitCache::new(&data);
        let a = cache.leaf(0, 1).unwrap();
        let b = cache.leaf(2, 3).unwrap();
        assert!(cache.join(&a, &b).unwrap().is_none());
    }
}
