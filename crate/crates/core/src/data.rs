//! Column-major matrix of copula-scale observations.

use crate::error::{Result, VineError};

/// `n` rows by `d` columns, every entry strictly inside `(0, 1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct DataMatrix {
    n: usize,
    cols: Vec<Vec<f64>>,
}

impl DataMatrix {
    pub fn from_columns(cols: Vec<Vec<f64>>) -> Result<Self> {
        let n = cols.first().map_or(0, Vec::len);
        for c in &cols {
            if c.len() != n {
                return Err(VineError::DimensionMismatch {
                    expected: n,
                    found: c.len(),
                });
            }
            if let Some(&bad) = c.iter().find(|&&x| !(x > 0.0 && x < 1.0)) {
                return Err(VineError::Domain { value: bad });
            }
        }
        Ok(Self { n, cols })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        let mut cols = vec![Vec::with_capacity(rows.len()); d];
        for r in rows {
            if r.len() != d {
                return Err(VineError::DimensionMismatch {
                    expected: d,
                    found: r.len(),
                });
            }
            for (c, &x) in cols.iter_mut().zip(r) {
                c.push(x);
            }
        }
        Self::from_columns(cols)
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.cols.len()
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.cols[j]
    }

    pub fn columns(&self) -> &[Vec<f64>] {
        &self.cols
    }

    pub fn row(&self, i: usize) -> Vec<f64> {
        self.cols.iter().map(|c| c[i]).collect()
    }

    /// Rows at `idx`, in that order.
    pub fn select_rows(&self, idx: &[usize]) -> DataMatrix {
        let cols = self.cols.iter().map(|c| idx.iter().map(|&i| c[i]).collect()).collect();
        DataMatrix { n: idx.len(), cols }
    }
}
