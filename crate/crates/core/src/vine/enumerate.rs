//! Exhaustive enumeration of regular vines on a few variables.

use crate::copula::BivariateCopula;
use crate::graph::DisjointSet;
use crate::vine::{adjacent, join, VineEdge, VineStructure};

/// Every regular vine on `d` variables with independence pair copulas.
/// The count grows as `d!/2 * 2^binom(d-2, 2)`; practical for `d <= 6`.
pub fn enumerate_structures(d: usize) -> Vec<VineStructure> {
    let mut out = Vec::new();
    if d >= 2 {
        extend(d, &mut Vec::new(), &mut out);
    }
    out
}

fn extend(d: usize, trees: &mut Vec<Vec<VineEdge>>, out: &mut Vec<VineStructure>) {
    let k = trees.len() + 1;
    if k == d {
        out.push(VineStructure::from_trees_unchecked(d, trees.clone()));
        return;
    }
    let indep = BivariateCopula::INDEPENDENCE;
    // candidate edges with the indices of the nodes they join
    let cands: Vec<(VineEdge, usize, usize)> = match trees.last() {
        None => (0..d)
            .flat_map(|i| (i + 1..d).map(move |j| (VineEdge::new(i, j, vec![], indep), i, j)))
            .collect(),
        Some(prev) => {
            let mut c = Vec::new();
            for a in 0..prev.len() {
                for b in a + 1..prev.len() {
                    if adjacent(&prev[a], &prev[b]) {
                        c.extend(join(&prev[a], &prev[b], indep).map(|e| (e, a, b)));
                    }
                }
            }
            c
        }
    };
    let nodes = d - k + 1;
    let mut chosen = Vec::new();
    spanning(&cands, 0, nodes, &DisjointSet::new(nodes), &mut chosen, &mut |tree| {
        trees.push(tree.iter().map(|&i| cands[i].0.clone()).collect());
        extend(d, trees, out);
        trees.pop();
    });
}

/// Calls `emit` with every subset of `cands` that forms a spanning tree.
fn spanning(
    cands: &[(VineEdge, usize, usize)],
    start: usize,
    nodes: usize,
    ds: &DisjointSet,
    chosen: &mut Vec<usize>,
    emit: &mut dyn FnMut(&[usize]),
) {
    if chosen.len() == nodes - 1 {
        emit(chosen);
        return;
    }
    let need = nodes - 1 - chosen.len();
    for idx in start..cands.len() {
        if cands.len() - idx < need {
            break;
        }
        let (_, a, b) = cands[idx];
        let mut next = ds.clone();
        if next.union(a, b) {
            chosen.push(idx);
            spanning(cands, idx + 1, nodes, &next, chosen, emit);
            chosen.pop();
        }
    }
}
