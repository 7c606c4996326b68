//! Regular-vine structures, validity checking and structure counting.
//!
//! An edge at level `k` is stored as its conditioned pair `(i, j)` with
//! `i < j` and a sorted conditioning set `D` of size `k - 1`. The nodes it
//! joins are the level `k - 1` edges whose complete unions are `D + {i}` and
//! `D + {j}`; at level 1 those are the single variables.

mod enumerate;
pub mod pseudo;

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use num_bigint::BigUint;

use crate::copula::BivariateCopula;
use crate::error::{Result, VineError};
use crate::graph::DisjointSet;

pub use enumerate::enumerate_structures;
pub use pseudo::{pseudo_observations, vine_loglik, CondStore};

#[derive(Clone, Debug, PartialEq)]
pub struct VineEdge {
    conditioned: (usize, usize),
    conditioning: Vec<usize>,
    copula: BivariateCopula,
}

impl VineEdge {
    pub fn new(i: usize, j: usize, conditioning: impl Into<Vec<usize>>, copula: BivariateCopula) -> Self {
        let mut conditioning = conditioning.into();
        conditioning.sort_unstable();
        Self {
            conditioned: (i.min(j), i.max(j)),
            conditioning,
            copula,
        }
    }

    pub fn conditioned(&self) -> (usize, usize) {
        self.conditioned
    }

    pub fn conditioning(&self) -> &[usize] {
        &self.conditioning
    }

    pub fn copula(&self) -> &BivariateCopula {
        &self.copula
    }

    pub fn set_copula(&mut self, copula: BivariateCopula) {
        self.copula = copula;
    }

    pub fn level(&self) -> usize {
        self.conditioning.len() + 1
    }

    /// Sorted `D + {i, j}`.
    pub fn union(&self) -> Vec<usize> {
        let mut u = self.conditioning.clone();
        u.push(self.conditioned.0);
        u.push(self.conditioned.1);
        u.sort_unstable();
        u
    }

    /// Complete unions of the two nodes the edge joins: `D + {i}`, `D + {j}`.
    pub fn node_unions(&self) -> [Vec<usize>; 2] {
        let with = |x: usize| {
            let mut u = self.conditioning.clone();
            u.push(x);
            u.sort_unstable();
            u
        };
        [with(self.conditioned.0), with(self.conditioned.1)]
    }

    pub fn label(&self) -> String {
        let (i, j) = self.conditioned;
        if self.conditioning.is_empty() {
            format!("{i},{j}")
        } else {
            let d: Vec<String> = self.conditioning.iter().map(usize::to_string).collect();
            format!("{i},{j}|{}", d.join(","))
        }
    }
}

impl fmt::Display for VineEdge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label())
    }
}

/// Whether two edges of the same level share a node (proximity).
pub fn adjacent(a: &VineEdge, b: &VineEdge) -> bool {
    let [a1, a2] = a.node_unions();
    let [b1, b2] = b.node_unions();
    a1 == b1 || a1 == b2 || a2 == b1 || a2 == b2
}

/// The next-level edge joining adjacent edges `a` and `b`: conditioned on
/// the intersection of their unions, with the symmetric difference as pair.
pub fn join(a: &VineEdge, b: &VineEdge, copula: BivariateCopula) -> Option<VineEdge> {
    if !adjacent(a, b) {
        return None;
    }
    let (ua, ub) = (a.union(), b.union());
    let common: Vec<usize> = ua.iter().copied().filter(|x| ub.contains(x)).collect();
    let mut diff = ua.iter().chain(&ub).copied().filter(|x| !common.contains(x));
    let (i, j) = (diff.next()?, diff.next()?);
    Some(VineEdge::new(i, j, common, copula))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ViolationKind {
    TooManyLevels { max: usize },
    EdgeCount { expected: usize, found: usize },
    Malformed(String),
    Duplicate,
    Cycle,
    Proximity,
}

/// One failed condition, located by 1-based tree level and edge label.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub level: usize,
    pub edge: Option<String>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "tree {}", self.level)?;
        if let Some(e) = &self.edge {
            write!(f, ", edge {e}")?;
        }
        match &self.kind {
            ViolationKind::TooManyLevels { max } => write!(f, ": at most {max} trees allowed"),
            ViolationKind::EdgeCount { expected, found } => {
                write!(f, ": expected {expected} edges, found {found}")
            }
            ViolationKind::Malformed(why) => write!(f, ": {why}"),
            ViolationKind::Duplicate => write!(f, ": duplicate edge"),
            ViolationKind::Cycle => write!(f, ": closes a cycle"),
            ViolationKind::Proximity => {
                write!(f, ": does not join two adjacent edges of the previous tree")
            }
        }
    }
}

/// `d` variables and trees `T_1 .. T_K`; levels beyond `K` are independence.
#[derive(Clone, Debug, PartialEq)]
pub struct VineStructure {
    d: usize,
    trees: Vec<Vec<VineEdge>>,
}

impl VineStructure {
    /// Builds a structure, rejecting it if `validate` finds any violation.
    pub fn new(d: usize, trees: Vec<Vec<VineEdge>>) -> Result<Self> {
        let v = Self { d, trees };
        match v.validate().into_iter().next() {
            None => Ok(v),
            Some(first) => Err(VineError::InvalidStructure(first.to_string())),
        }
    }

    /// Builds without validation; callers construct valid trees by design.
    pub fn from_trees_unchecked(d: usize, trees: Vec<Vec<VineEdge>>) -> Self {
        Self { d, trees }
    }

    /// The path vine on `0..d` in natural order with `truncation` trees.
    /// Edge `i` of tree `k` (both 1-based level, 0-based position) joins
    /// `i` and `i + k` given the variables between them, with copula
    /// `copula(k, i)`.
    pub fn d_vine(
        d: usize,
        truncation: usize,
        mut copula: impl FnMut(usize, usize) -> BivariateCopula,
    ) -> Result<Self> {
        let trees = (1..=truncation.min(d.saturating_sub(1)))
            .map(|k| {
                (0..d - k)
                    .map(|i| VineEdge::new(i, i + k, (i + 1..i + k).collect::<Vec<_>>(), copula(k, i)))
                    .collect()
            })
            .collect();
        Self::new(d, trees)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of stored trees.
    pub fn truncation(&self) -> usize {
        self.trees.len()
    }

    pub fn trees(&self) -> &[Vec<VineEdge>] {
        &self.trees
    }

    pub fn trees_mut(&mut self) -> &mut [Vec<VineEdge>] {
        &mut self.trees
    }

    pub fn edges(&self) -> impl Iterator<Item = &VineEdge> {
        self.trees.iter().flatten()
    }

    pub fn edge_count(&self) -> usize {
        self.trees.iter().map(Vec::len).sum()
    }

    /// Conditioned pairs of the first tree.
    pub fn first_tree(&self) -> BTreeSet<(usize, usize)> {
        self.trees
            .first()
            .map(|t| t.iter().map(VineEdge::conditioned).collect())
            .unwrap_or_default()
    }

    /// Keeps the first `k` trees.
    pub fn truncated(&self, k: usize) -> Self {
        Self {
            d: self.d,
            trees: self.trees.iter().take(k).cloned().collect(),
        }
    }

    pub fn find(&self, i: usize, j: usize, conditioning: &[usize]) -> Option<&VineEdge> {
        let key = (i.min(j), i.max(j));
        self.trees
            .get(conditioning.len())?
            .iter()
            .find(|e| e.conditioned == key && e.conditioning == conditioning)
    }

    /// Every edge in a valid vine satisfies `validate`; the list is empty
    /// exactly when the structure is a regular vine truncated at some level.
    pub fn validate(&self) -> Vec<Violation> {
        let d = self.d;
        let mut out = Vec::new();
        if d < 2 {
            out.push(Violation {
                level: 0,
                edge: None,
                kind: ViolationKind::Malformed(format!("need at least 2 variables, got {d}")),
            });
            return out;
        }
        if self.trees.len() > d - 1 {
            out.push(Violation {
                level: self.trees.len(),
                edge: None,
                kind: ViolationKind::TooManyLevels { max: d - 1 },
            });
        }
        for (idx, tree) in self.trees.iter().enumerate().take(d - 1) {
            let k = idx + 1;
            if tree.len() != d - k {
                out.push(Violation {
                    level: k,
                    edge: None,
                    kind: ViolationKind::EdgeCount {
                        expected: d - k,
                        found: tree.len(),
                    },
                });
            }
            let prev: HashMap<Vec<usize>, usize> = if k == 1 {
                HashMap::new()
            } else {
                self.trees[idx - 1]
                    .iter()
                    .enumerate()
                    .map(|(p, e)| (e.union(), p))
                    .collect()
            };
            let nodes = if k == 1 { d } else { self.trees[idx - 1].len() };
            let mut ds = DisjointSet::new(nodes);
            let mut seen = HashSet::new();
            for e in tree {
                let flag = |kind| Violation {
                    level: k,
                    edge: Some(e.label()),
                    kind,
                };
                if let Some(why) = malformed(e, d, k) {
                    out.push(flag(ViolationKind::Malformed(why)));
                    continue;
                }
                if !seen.insert(e.union()) {
                    out.push(flag(ViolationKind::Duplicate));
                    continue;
                }
                let ends = if k == 1 {
                    Some(e.conditioned)
                } else {
                    let [ni, nj] = e.node_unions();
                    match (prev.get(&ni), prev.get(&nj)) {
                        (Some(&a), Some(&b)) => {
                            let below = &self.trees[idx - 1];
                            let shares = |p: usize| below[p].node_unions().contains(&e.conditioning.to_vec());
                            (k == 2 || (shares(a) && shares(b))).then_some((a, b))
                        }
                        _ => None,
                    }
                };
                match ends {
                    None => out.push(flag(ViolationKind::Proximity)),
                    Some((a, b)) => {
                        if !ds.union(a, b) {
                            out.push(flag(ViolationKind::Cycle));
                        }
                    }
                }
            }
        }
        out
    }

    /// Extends a truncated structure to `d - 1` trees with independence
    /// edges. Any spanning tree of the proximity graph is a valid extension.
    pub fn completed(&self) -> Self {
        let mut trees = self.trees.clone();
        if trees.is_empty() && self.d >= 2 {
            trees.push(
                (1..self.d)
                    .map(|j| VineEdge::new(j - 1, j, vec![], BivariateCopula::INDEPENDENCE))
                    .collect(),
            );
        }
        while trees.len() < self.d.saturating_sub(1) {
            let prev = trees.last().expect("nonempty");
            let mut ds = DisjointSet::new(prev.len());
            let mut next = Vec::new();
            for a in 0..prev.len() {
                for b in a + 1..prev.len() {
                    if adjacent(&prev[a], &prev[b]) && ds.union(a, b) {
                        next.extend(join(&prev[a], &prev[b], BivariateCopula::INDEPENDENCE));
                    }
                }
            }
            trees.push(next);
        }
        Self { d: self.d, trees }
    }
}

fn malformed(e: &VineEdge, d: usize, k: usize) -> Option<String> {
    let (i, j) = e.conditioned;
    if i == j {
        return Some("conditioned pair repeats a variable".into());
    }
    if j >= d || e.conditioning.iter().any(|&x| x >= d) {
        return Some(format!("variable index out of range for d = {d}"));
    }
    if e.conditioning.contains(&i) || e.conditioning.contains(&j) {
        return Some("conditioned variable also in conditioning set".into());
    }
    if e.conditioning.windows(2).any(|w| w[0] == w[1]) {
        return Some("conditioning set repeats a variable".into());
    }
    if e.conditioning.len() != k - 1 {
        return Some(format!(
            "conditioning set has {} variables, expected {}",
            e.conditioning.len(),
            k - 1
        ));
    }
    None
}

/// Number of distinct regular vines on `d` labelled variables,
/// `d!/2 * 2^binom(d - 2, 2)`.
pub fn count_structures(d: usize) -> Result<BigUint> {
    if d < 2 {
        return Err(VineError::Degenerate(format!(
            "vines need at least 2 variables, got {d}"
        )));
    }
    let mut fact = BigUint::from(1u32);
    for k in 3..=d {
        fact *= k;
    }
    let m = d - 2;
    let exp = m * m.saturating_sub(1) / 2;
    Ok(fact << exp)
}
