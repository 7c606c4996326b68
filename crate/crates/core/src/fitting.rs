//! Pair-copula selection for a fixed structure, tree by tree.

use crate::copula::fit::{select_with_tau, MIN_FIT_ROWS};
use crate::copula::kendall::tau_a;
use crate::copula::{BivariateCopula, PairSample};
use crate::data::DataMatrix;
use crate::error::{Result, VineError};
use crate::vine::{CondStore, VineStructure};

pub(crate) fn check_fit_input(data: &DataMatrix) -> Result<()> {
    if data.nrows() < MIN_FIT_ROWS {
        return Err(VineError::Degenerate(format!(
            "structure learning needs at least {MIN_FIT_ROWS} rows, got {}",
            data.nrows()
        )));
    }
    if data.ncols() < 2 {
        return Err(VineError::Degenerate(format!(
            "structure learning needs at least 2 columns, got {}",
            data.ncols()
        )));
    }
    Ok(())
}

/// Selected copula and its log-likelihood for the arguments `(a, b)`.
pub(crate) fn select_pair(a: &[f64], b: &[f64]) -> Result<(BivariateCopula, f64)> {
    let s = PairSample::new_unchecked(a, b);
    let tau = tau_a(a, b)?;
    Ok(select_with_tau(&s, tau))
}

/// Refits every pair copula of `v` on `data`, shallow trees first.
pub fn fit_structure(v: &VineStructure, data: &DataMatrix) -> Result<VineStructure> {
    check_fit_input(data)?;
    if data.ncols() != v.d() {
        return Err(VineError::DimensionMismatch {
            expected: v.d(),
            found: data.ncols(),
        });
    }
    let mut out = v.clone();
    let k_max = out.truncation();
    let mut store = CondStore::new(data);
    for k in 0..k_max {
        for e in out.trees_mut()[k].iter_mut() {
            let (a, b) = store.pair(e)?;
            let (c, _) = select_pair(a, b)?;
            e.set_copula(c);
        }
        if k + 1 < k_max {
            for e in &out.trees()[k] {
                store.absorb(e)?;
            }
        }
    }
    Ok(out)
}
