//! Kendall's tau-a in O(n log n) following Knight's merge-sort algorithm.

use crate::copula::PairSample;
use crate::error::{Result, VineError};

fn tied_pairs<T: PartialEq>(sorted: &[T]) -> u64 {
    let mut total = 0u64;
    let mut run = 1u64;
    for w in sorted.windows(2) {
        if w[0] == w[1] {
            run += 1;
        } else {
            total += run * (run - 1) / 2;
            run = 1;
        }
    }
    total + run * (run - 1) / 2
}

/// Sorts `xs` in place and returns the number of inversions.
fn merge_count(xs: &mut [f64], buf: &mut [f64]) -> u64 {
    let n = xs.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut swaps = merge_count(&mut xs[..mid], &mut buf[..mid]);
    swaps += merge_count(&mut xs[mid..], &mut buf[mid..]);
    let (mut i, mut j, mut k) = (0, mid, 0);
    while i < mid && j < n {
        if xs[j] < xs[i] {
            buf[k] = xs[j];
            swaps += (mid - i) as u64;
            j += 1;
        } else {
            buf[k] = xs[i];
            i += 1;
        }
        k += 1;
    }
    buf[k..k + mid - i].copy_from_slice(&xs[i..mid]);
    k += mid - i;
    buf[k..k + n - j].copy_from_slice(&xs[j..n]);
    xs.copy_from_slice(&buf[..n]);
    swaps
}

/// Concordant minus discordant pairs over `n choose 2`; tied pairs count zero.
pub fn kendall_tau(s: &PairSample) -> Result<f64> {
    tau_a(s.u(), s.v())
}

pub(crate) fn tau_a(u: &[f64], v: &[f64]) -> Result<f64> {
    let n = u.len();
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_unstable_by(|&a, &b| u[a].total_cmp(&u[b]).then(v[a].total_cmp(&v[b])));
    let su: Vec<f64> = idx.iter().map(|&i| u[i]).collect();
    let mut sv: Vec<f64> = idx.iter().map(|&i| v[i]).collect();
    let joint: Vec<(f64, f64)> = idx.iter().map(|&i| (u[i], v[i])).collect();

    let n0 = (n as u64) * (n as u64 - 1) / 2;
    let n1 = tied_pairs(&su);
    let n3 = tied_pairs(&joint);
    let mut buf = vec![0.0; n];
    let swaps = merge_count(&mut sv, &mut buf);
    let n2 = tied_pairs(&sv);
    if n1 == n0 || n2 == n0 {
        return Err(VineError::Degenerate("constant column in Kendall's tau".into()));
    }
    let s = n0 as i64 - n1 as i64 - n2 as i64 + n3 as i64 - 2 * swaps as i64;
    Ok(s as f64 / n0 as f64)
}
