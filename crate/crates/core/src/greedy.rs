//! Tree-by-tree maximum spanning trees on absolute Kendall's tau.

use rayon::prelude::*;

use crate::copula::kendall::tau_a;
use crate::copula::BivariateCopula;
use crate::data::DataMatrix;
use crate::error::Result;
use crate::fitting::{check_fit_input, select_pair};
use crate::graph::DisjointSet;
use crate::vine::{adjacent, join, CondStore, VineEdge, VineStructure};

/// Candidate edges of the next tree with the indices of the nodes they
/// join, in lexicographic order of node indices.
pub(crate) fn candidates(d: usize, prev: Option<&[VineEdge]>) -> Vec<(VineEdge, usize, usize)> {
    let indep = BivariateCopula::INDEPENDENCE;
    match prev {
        None => (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (VineEdge::new(i, j, vec![], indep), i, j)))
            .collect(),
        Some(prev) => {
            let mut out = Vec::new();
            for a in 0..prev.len() {
                for b in a + 1..prev.len() {
                    if adjacent(&prev[a], &prev[b]) {
                        out.extend(join(&prev[a], &prev[b], indep).map(|e| (e, a, b)));
                    }
                }
            }
            out
        }
    }
}

/// Fits trees `1..=truncation` (capped at `d - 1`). Each tree is the
/// maximum spanning tree of `|tau|` over proximity-allowed pairs, ties going
/// to the lexicographically smaller pair; pair copulas come from
/// `select_family`.
pub fn fit_greedy(data: &DataMatrix, truncation: usize) -> Result<VineStructure> {
    check_fit_input(data)?;
    let d = data.ncols();
    let k_max = truncation.min(d - 1);
    let mut store = CondStore::new(data);
    let mut trees: Vec<Vec<VineEdge>> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let cands = candidates(d, trees.last().map(Vec::as_slice));
        let taus: Vec<f64> = cands
            .par_iter()
            .map(|(e, _, _)| {
                let (a, b) = store.pair(e)?;
                tau_a(a, b)
            })
            .collect::<Result<_>>()?;
        let mut order: Vec<usize> = (0..cands.len()).collect();
        order.sort_by(|&x, &y| taus[y].abs().total_cmp(&taus[x].abs()));

        let nodes = d - k + 1;
        let mut ds = DisjointSet::new(nodes);
        let mut tree = Vec::with_capacity(nodes - 1);
        for idx in order {
            let (e, a, b) = &cands[idx];
            if ds.union(*a, *b) {
                let mut e = e.clone();
                let (u, v) = store.pair(&e)?;
                e.set_copula(select_pair(u, v)?.0);
                tree.push(e);
                if tree.len() == nodes - 1 {
                    break;
                }
            }
        }
        if k < k_max {
            for e in &tree {
                store.absorb(e)?;
            }
        }
        trees.push(tree);
    }
    Ok(VineStructure::from_trees_unchecked(d, trees))
}
