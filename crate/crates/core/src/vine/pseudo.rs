//! Conditional pseudo-observations and the vine log-likelihood.

use std::collections::HashMap;

use crate::copula::{loglik, BivariateCopula, PairSample};
use crate::data::DataMatrix;
use crate::error::{Result, VineError};
use crate::vine::{VineEdge, VineStructure};

/// `h(u_r | v_r)` for every row.
pub fn h_column(c: &BivariateCopula, u: &[f64], v: &[f64]) -> Vec<f64> {
    if c.is_independence() {
        return u.to_vec();
    }
    u.iter().zip(v).map(|(&a, &b)| c.hfunc(a, b)).collect()
}

/// Conditional values `u_{x|D}` keyed by variable and sorted conditioning
/// set. Within one vine every key is produced by at most one edge.
pub struct CondStore<'a> {
    data: &'a DataMatrix,
    map: HashMap<(usize, Vec<usize>), Vec<f64>>,
}

impl<'a> CondStore<'a> {
    pub fn new(data: &'a DataMatrix) -> Self {
        Self {
            data,
            map: HashMap::new(),
        }
    }

    pub fn data(&self) -> &'a DataMatrix {
        self.data
    }

    pub fn get(&self, var: usize, given: &[usize]) -> Option<&[f64]> {
        if given.is_empty() {
            return (var < self.data.ncols()).then(|| self.data.col(var));
        }
        self.map.get(&(var, given.to_vec())).map(Vec::as_slice)
    }

    /// The edge's arguments `(u_{i|D}, u_{j|D})`.
    pub fn pair(&self, e: &VineEdge) -> Result<(&[f64], &[f64])> {
        let (i, j) = e.conditioned();
        let d = e.conditioning();
        match (self.get(i, d), self.get(j, d)) {
            (Some(a), Some(b)) => Ok((a, b)),
            _ => Err(VineError::MissingParent {
                level: e.level(),
                edge: e.label(),
            }),
        }
    }

    /// Stores `u_{i|D+j}` and `u_{j|D+i}` produced by the fitted edge.
    pub fn absorb(&mut self, e: &VineEdge) -> Result<()> {
        let (i, j) = e.conditioned();
        let (a, b) = self.pair(e)?;
        let c = e.copula();
        let ui = h_column(c, a, b);
        let uj = h_column(c, b, a);
        let key = |x: usize, y: usize| {
            let mut g = e.conditioning().to_vec();
            g.push(y);
            g.sort_unstable();
            (x, g)
        };
        self.map.insert(key(i, j), ui);
        self.map.insert(key(j, i), uj);
        Ok(())
    }
}

fn check_dims(v: &VineStructure, data: &DataMatrix) -> Result<()> {
    if v.d() != data.ncols() {
        return Err(VineError::DimensionMismatch {
            expected: v.d(),
            found: data.ncols(),
        });
    }
    Ok(())
}

/// Columns `(u_{i|D}, u_{j|D})` of one edge, `i < j`.
pub type EdgeColumns = (Vec<f64>, Vec<f64>);

/// Per level, per edge, the conditional columns of that edge.
pub fn pseudo_observations(v: &VineStructure, data: &DataMatrix) -> Result<Vec<Vec<EdgeColumns>>> {
    check_dims(v, data)?;
    let mut store = CondStore::new(data);
    let mut out = Vec::with_capacity(v.truncation());
    for (k, tree) in v.trees().iter().enumerate() {
        let mut level = Vec::with_capacity(tree.len());
        for e in tree {
            let (a, b) = store.pair(e)?;
            level.push((a.to_vec(), b.to_vec()));
        }
        if k + 1 < v.truncation() {
            for e in tree {
                store.absorb(e)?;
            }
        }
        out.push(level);
    }
    Ok(out)
}

/// Log-likelihood contribution of every edge, by level.
pub fn edge_logliks(v: &VineStructure, data: &DataMatrix) -> Result<Vec<Vec<f64>>> {
    check_dims(v, data)?;
    let mut store = CondStore::new(data);
    let mut out = Vec::with_capacity(v.truncation());
    for (k, tree) in v.trees().iter().enumerate() {
        let mut level = Vec::with_capacity(tree.len());
        for e in tree {
            let (a, b) = store.pair(e)?;
            level.push(loglik(e.copula(), &PairSample::new_unchecked(a, b)));
        }
        if k + 1 < v.truncation() {
            for e in tree {
                store.absorb(e)?;
            }
        }
        out.push(level);
    }
    Ok(out)
}

/// Sum of the log-densities of every pair copula at its pseudo-observations.
pub fn vine_loglik(v: &VineStructure, data: &DataMatrix) -> Result<f64> {
    Ok(edge_logliks(v, data)?.iter().flatten().sum())
}
