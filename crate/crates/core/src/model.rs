//! JSON model document: marginals, structure and pair copulas.
//!
//! Parameters are stored as decimal strings produced by the shortest
//! round-trip formatting, so a load reproduces every `theta` bit for bit.

use serde::{Deserialize, Serialize};

use crate::copula::{BivariateCopula, CopulaFamily};
use crate::error::{Result, VineError};
use crate::marginals::MarginalModel;
use crate::vine::{VineEdge, VineStructure};

pub const MODEL_VERSION: u32 = 1;

/// A fitted model: the vine on the copula scale plus one marginal per column.
#[derive(Clone, Debug, PartialEq)]
pub struct VineModel {
    pub column_names: Vec<String>,
    pub marginals: Vec<MarginalModel>,
    pub vine: VineStructure,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EdgeDoc {
    conditioned: [usize; 2],
    conditioning: Vec<usize>,
    family: CopulaFamily,
    theta: String,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: u32,
    d: usize,
    column_names: Vec<String>,
    truncation: usize,
    marginals: Vec<Vec<f64>>,
    trees: Vec<Vec<EdgeDoc>>,
}

fn schema(path: impl Into<String>, message: impl Into<String>) -> VineError {
    VineError::Schema {
        path: path.into(),
        message: message.into(),
    }
}

impl VineModel {
    pub fn new(column_names: Vec<String>, marginals: Vec<MarginalModel>, vine: VineStructure) -> Result<Self> {
        let d = vine.d();
        for found in [column_names.len(), marginals.len()] {
            if found != d {
                return Err(VineError::DimensionMismatch { expected: d, found });
            }
        }
        if let Some(v) = vine.validate().first() {
            return Err(VineError::InvalidStructure(v.to_string()));
        }
        Ok(Self {
            column_names,
            marginals,
            vine,
        })
    }

    pub fn d(&self) -> usize {
        self.vine.d()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = ModelDoc {
            version: MODEL_VERSION,
            d: self.d(),
            column_names: self.column_names.clone(),
            truncation: self.vine.truncation(),
            marginals: self.marginals.iter().map(|m| m.sorted_values().to_vec()).collect(),
            trees: self
                .vine
                .trees()
                .iter()
                .map(|t| {
                    t.iter()
                        .map(|e| {
                            let (i, j) = e.conditioned();
                            EdgeDoc {
                                conditioned: [i, j],
                                conditioning: e.conditioning().to_vec(),
                                family: e.copula().family(),
                                theta: e.copula().theta().to_string(),
                            }
                        })
                        .collect()
                })
                .collect(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let (column_names, marginals, vine) = parse(text)?;
        if let Some(v) = vine.validate().first() {
            return Err(schema("trees", v.to_string()));
        }
        Self::new(column_names, marginals, vine)
    }
}

/// The stored structure without the regular-vine check, for reporting
/// every violation of a damaged document.
pub fn structure_from_json(text: &str) -> Result<VineStructure> {
    Ok(parse(text)?.2)
}

fn parse(text: &str) -> Result<(Vec<String>, Vec<MarginalModel>, VineStructure)> {
    let de = &mut serde_json::Deserializer::from_str(text);
    let doc: ModelDoc = serde_path_to_error::deserialize(de).map_err(|e| {
        let path = e.path().to_string();
        schema(path, e.into_inner().to_string())
    })?;
    if doc.version != MODEL_VERSION {
        return Err(schema(
            "version",
            format!("unsupported version {}, expected {MODEL_VERSION}", doc.version),
        ));
    }
    let d = doc.d;
    if d < 2 {
        return Err(schema("d", format!("need at least 2 variables, got {d}")));
    }
    if doc.column_names.len() != d {
        return Err(schema(
            "column_names",
            format!("expected {d} names, found {}", doc.column_names.len()),
        ));
    }
    if doc.marginals.len() != d {
        return Err(schema(
            "marginals",
            format!("expected {d} margins, found {}", doc.marginals.len()),
        ));
    }
    if doc.trees.len() != doc.truncation {
        return Err(schema(
            "truncation",
            format!(
                "truncation {} disagrees with {} stored trees",
                doc.truncation,
                doc.trees.len()
            ),
        ));
    }
    let marginals = doc
        .marginals
        .into_iter()
        .enumerate()
        .map(|(j, m)| MarginalModel::from_sorted(m).map_err(|e| schema(format!("marginals[{j}]"), e.to_string())))
        .collect::<Result<Vec<_>>>()?;
    let mut trees = Vec::with_capacity(doc.trees.len());
    for (k, tree) in doc.trees.into_iter().enumerate() {
        let mut edges = Vec::with_capacity(tree.len());
        for (p, e) in tree.into_iter().enumerate() {
            let at = format!("trees[{k}][{p}]");
            let theta: f64 = e
                .theta
                .parse()
                .map_err(|_| schema(format!("{at}.theta"), format!("not a number: {:?}", e.theta)))?;
            let copula =
                BivariateCopula::new(e.family, theta).map_err(|err| schema(format!("{at}.theta"), err.to_string()))?;
            let [i, j] = e.conditioned;
            edges.push(VineEdge::new(i, j, e.conditioning, copula));
        }
        trees.push(edges);
    }
    Ok((
        doc.column_names,
        marginals,
        VineStructure::from_trees_unchecked(d, trees),
    ))
}
