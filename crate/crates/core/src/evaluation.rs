//! Model-quality metrics on the original and the copula scale.

use crate::copula::kendall::tau_a;
use crate::data::DataMatrix;
use crate::error::{Result, VineError};
use crate::marginals::MarginalModel;
use crate::vine::{vine_loglik, VineStructure};

/// Pushes raw rows through their marginals onto the copula scale.
pub fn to_copula_scale(marginals: &[MarginalModel], rows: &[Vec<f64>]) -> Result<DataMatrix> {
    let d = marginals.len();
    let mut cols = vec![Vec::with_capacity(rows.len()); d];
    for row in rows {
        if row.len() != d {
            return Err(VineError::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        for (j, &x) in row.iter().enumerate() {
            cols[j].push(marginals[j].transform(x));
        }
    }
    DataMatrix::from_columns(cols)
}

/// Vine log-likelihood per row of raw data.
pub fn loglik_per_instance(v: &VineStructure, marginals: &[MarginalModel], rows: &[Vec<f64>]) -> Result<f64> {
    if marginals.len() != v.d() {
        return Err(VineError::DimensionMismatch {
            expected: v.d(),
            found: marginals.len(),
        });
    }
    if rows.is_empty() {
        return Err(VineError::Degenerate("no rows to evaluate".into()));
    }
    let u = to_copula_scale(marginals, rows)?;
    Ok(vine_loglik(v, &u)? / rows.len() as f64)
}

/// `100 * L(fitted) / L(truth)` on the same copula-scale data.
pub fn relative_loglik(fitted: &VineStructure, truth: &VineStructure, data: &DataMatrix) -> Result<f64> {
    if fitted.d() != truth.d() {
        return Err(VineError::DimensionMismatch {
            expected: truth.d(),
            found: fitted.d(),
        });
    }
    let reference = vine_loglik(truth, data)?;
    if reference.abs() < 1e-6 {
        return Err(VineError::ZeroReference(reference));
    }
    if fitted == truth {
        return Ok(100.0);
    }
    Ok(100.0 * vine_loglik(fitted, data)? / reference)
}

/// Pairwise Kendall's tau of the columns; the diagonal is 1.
pub fn tau_matrix(columns: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = columns.len();
    let mut m = vec![vec![1.0; d]; d];
    for i in 0..d {
        for j in i + 1..d {
            if columns[i].len() != columns[j].len() {
                return Err(VineError::DimensionMismatch {
                    expected: columns[i].len(),
                    found: columns[j].len(),
                });
            }
            let t = tau_a(&columns[i], &columns[j])?;
            m[i][j] = t;
            m[j][i] = t;
        }
    }
    Ok(m)
}

fn columns_of(rows: &[Vec<f64>]) -> Result<Vec<Vec<f64>>> {
    let d = rows.first().map_or(0, Vec::len);
    let mut cols = vec![Vec::with_capacity(rows.len()); d];
    for row in rows {
        if row.len() != d {
            return Err(VineError::DimensionMismatch {
                expected: d,
                found: row.len(),
            });
        }
        for (c, &x) in cols.iter_mut().zip(row) {
            c.push(x);
        }
    }
    Ok(cols)
}

/// Largest absolute entrywise difference between the tau matrices of two
/// row sets with the same number of columns.
pub fn tau_matrix_distance(real: &[Vec<f64>], synthetic: &[Vec<f64>]) -> Result<f64> {
    let (a, b) = (columns_of(real)?, columns_of(synthetic)?);
    if a.len() != b.len() {
        return Err(VineError::DimensionMismatch {
            expected: a.len(),
            found: b.len(),
        });
    }
    let (ta, tb) = (tau_matrix(&a)?, tau_matrix(&b)?);
    Ok(ta
        .iter()
        .flatten()
        .zip(tb.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::copula::{BivariateCopula, CopulaFamily};
    use crate::greedy::fit_greedy;
    use crate::sampler::{sample, sample_copula};
    use crate::vine::tests::{e1, five_dim_example};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn clayton_chain(theta: f64) -> VineStructure {
        let c = BivariateCopula::new(CopulaFamily::Clayton, theta).unwrap();
        let mut a = e1(1, 2, &[]);
        let mut b = e1(2, 3, &[]);
        a.set_copula(c);
        b.set_copula(c);
        VineStructure::new(3, vec![vec![a, b]]).unwrap()
    }

    fn rows_of(m: &DataMatrix) -> Vec<Vec<f64>> {
        (0..m.nrows()).map(|i| m.row(i)).collect()
    }

    fn margins(rows: &[Vec<f64>]) -> Vec<MarginalModel> {
        let cols = columns_of(rows).unwrap();
        cols.iter().map(|c| MarginalModel::fit(c).unwrap()).collect()
    }

    #[test]
    fn independence_vine_scores_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|_| (0..5).map(|_| rng.gen::<f64>() * 10.0).collect())
            .collect();
        let m = margins(&rows);
        assert_eq!(loglik_per_instance(&five_dim_example(), &m, &rows).unwrap(), 0.0);
    }

    #[test]
    fn deeper_truncation_never_fits_worse() {
        let mut v = five_dim_example();
        for (k, t) in v.trees_mut().iter_mut().enumerate() {
            for e in t {
                e.set_copula(BivariateCopula::new(CopulaFamily::Gumbel, 1.2 + 0.5 / (k + 1) as f64).unwrap());
            }
        }
        let u = sample_copula(&v, 600, 3).unwrap();
        let rows = rows_of(&u);
        let m = margins(&rows);
        let scaled = to_copula_scale(&m, &rows).unwrap();
        let k1 = fit_greedy(&scaled, 1).unwrap();
        let k3 = fit_greedy(&scaled, 3).unwrap();
        let (a, b) = (
            loglik_per_instance(&k1, &m, &rows).unwrap(),
            loglik_per_instance(&k3, &m, &rows).unwrap(),
        );
        assert!(b >= a, "{b} < {a}");
    }

    #[test]
    fn relative_loglik_of_truth_is_100() {
        let v = clayton_chain(2.0);
        let u = sample_copula(&v, 300, 2).unwrap();
        assert_eq!(relative_loglik(&v, &v, &u).unwrap(), 100.0);
        let indep = v.truncated(0).completed();
        assert!(relative_loglik(&indep, &v, &u).unwrap() < 100.0);
        assert!(matches!(
            relative_loglik(&v, &indep, &u),
            Err(VineError::ZeroReference(_))
        ));
    }

    #[test]
    fn tau_distance_cases() {
        let v = clayton_chain(8.0);
        let real = rows_of(&sample_copula(&v, 2000, 4).unwrap());
        assert_eq!(tau_matrix_distance(&real, &real).unwrap(), 0.0);
        let indep = rows_of(&sample_copula(&v.truncated(0).completed(), 2000, 5).unwrap());
        let dist = tau_matrix_distance(&real, &indep).unwrap();
        assert!((dist - 0.8).abs() < 0.05, "{dist}");
        assert!(tau_matrix_distance(&real, &[vec![0.1, 0.2]]).is_err());
    }

    #[test]
    fn well_fit_synthetic_is_close() {
        let v = clayton_chain(1.7);
        let u = sample_copula(&v, 5000, 6).unwrap();
        let rows: Vec<Vec<f64>> = rows_of(&u)
            .into_iter()
            .map(|r| r.iter().map(|x| 3.0 * x * x - 1.0).collect())
            .collect();
        let m = margins(&rows);
        let fitted = fit_greedy(&to_copula_scale(&m, &rows).unwrap(), 2).unwrap();
        let syn = sample(&fitted, &m, 5000, 7).unwrap();
        assert!(tau_matrix_distance(&rows, &syn).unwrap() < 0.08);
    }
}
