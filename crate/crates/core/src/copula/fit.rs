//! Maximum-likelihood fitting and three-vote family selection.

use crate::copula::kendall::tau_a;
use crate::copula::normal::norm_ppf;
use crate::copula::{clamp_unit, gaussian_ln_pdf_scores, tau_to_theta, BivariateCopula, CopulaFamily};
use crate::error::{Result, VineError};

/// Paired observations on the copula scale.
#[derive(Clone, Copy, Debug)]
pub struct PairSample<'a> {
    u: &'a [f64],
    v: &'a [f64],
}

impl<'a> PairSample<'a> {
    pub fn new(u: &'a [f64], v: &'a [f64]) -> Result<Self> {
        if u.len() != v.len() {
            return Err(VineError::DimensionMismatch {
                expected: u.len(),
                found: v.len(),
            });
        }
        if u.len() < 2 {
            return Err(VineError::Degenerate("a pair sample needs at least 2 rows".into()));
        }
        if let Some(&bad) = u.iter().chain(v).find(|&&x| !(x > 0.0 && x < 1.0)) {
            return Err(VineError::Domain { value: bad });
        }
        Ok(Self { u, v })
    }

    /// Caller guarantees equal lengths and entries in `(0, 1)`.
    pub(crate) fn new_unchecked(u: &'a [f64], v: &'a [f64]) -> Self {
        debug_assert_eq!(u.len(), v.len());
        Self { u, v }
    }

    pub fn u(&self) -> &'a [f64] {
        self.u
    }

    pub fn v(&self) -> &'a [f64] {
        self.v
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }
}

pub fn loglik(c: &BivariateCopula, s: &PairSample) -> f64 {
    if c.is_independence() {
        return 0.0;
    }
    s.u.iter().zip(s.v).map(|(&u, &v)| c.ln_pdf(u, v)).sum()
}

/// Minimum log-likelihood gain over independence for a one-parameter family
/// to be kept: half of `ln n`, the BIC price of the extra parameter.
pub fn independence_threshold(n: usize) -> f64 {
    0.5 * (n as f64).ln()
}

pub const MIN_FIT_ROWS: usize = 10;

/// Fits `family` by maximum likelihood starting from the tau inversion.
pub fn fit_mle(family: CopulaFamily, s: &PairSample) -> Result<BivariateCopula> {
    check_rows(s)?;
    let tau = tau_a(s.u, s.v)?;
    Ok(fit_with_tau(family, s, tau).0)
}

fn check_rows(s: &PairSample) -> Result<()> {
    if s.len() < MIN_FIT_ROWS {
        return Err(VineError::Degenerate(format!(
            "copula fitting needs at least {MIN_FIT_ROWS} rows, got {}",
            s.len()
        )));
    }
    Ok(())
}

/// Search coordinate for each family: the optimizer works on `x`, the
/// copula sees `theta = to_theta(x)`.
struct Chart {
    lo: f64,
    hi: f64,
    half_width: f64,
    sign: f64,
    log_scale: bool,
}

impl Chart {
    fn for_family(family: CopulaFamily, init: f64) -> Option<Chart> {
        let chart = match family {
            CopulaFamily::Independence => return None,
            CopulaFamily::Gaussian => Chart {
                lo: -0.995,
                hi: 0.995,
                half_width: 0.2,
                sign: 1.0,
                log_scale: false,
            },
            CopulaFamily::Clayton => Chart {
                lo: 1e-4_f64.ln(),
                hi: 30f64.ln(),
                half_width: 1.0,
                sign: 1.0,
                log_scale: true,
            },
            CopulaFamily::Frank => Chart {
                lo: 1e-4_f64.ln(),
                hi: 40f64.ln(),
                half_width: 1.0,
                sign: init.signum(),
                log_scale: true,
            },
            CopulaFamily::Gumbel => Chart {
                lo: 0.0,
                hi: 30f64.ln(),
                half_width: 0.5,
                sign: 1.0,
                log_scale: true,
            },
        };
        Some(chart)
    }

    fn to_theta(&self, x: f64) -> f64 {
        if self.log_scale {
            self.sign * x.exp()
        } else {
            x
        }
    }

    fn coordinate(&self, theta: f64) -> f64 {
        let x = if self.log_scale { theta.abs().ln() } else { theta };
        x.clamp(self.lo, self.hi)
    }
}

/// Returns the fitted copula and its log-likelihood.
pub(crate) fn fit_with_tau(family: CopulaFamily, s: &PairSample, tau: f64) -> (BivariateCopula, f64) {
    let indep = (BivariateCopula::INDEPENDENCE, 0.0);
    let Ok(init) = tau_to_theta(family, tau) else {
        return indep;
    };
    let Some(chart) = Chart::for_family(family, init) else {
        return indep;
    };

    let scores = (family == CopulaFamily::Gaussian).then(|| {
        let x: Vec<f64> = s.u.iter().map(|&u| norm_ppf(clamp_unit(u))).collect();
        let y: Vec<f64> = s.v.iter().map(|&v| norm_ppf(clamp_unit(v))).collect();
        (x, y)
    });
    let ll = |x: f64| -> f64 {
        let theta = chart.to_theta(x);
        let val = match &scores {
            Some((a, b)) => a
                .iter()
                .zip(b)
                .map(|(&p, &q)| gaussian_ln_pdf_scores(theta, p, q))
                .sum(),
            None => match BivariateCopula::new(family, theta) {
                Ok(c) => loglik(&c, s),
                Err(_) => f64::NEG_INFINITY,
            },
        };
        if val.is_nan() {
            f64::NEG_INFINITY
        } else {
            val
        }
    };

    let x0 = chart.coordinate(init);
    let (mut best_x, mut best_ll) = (x0, ll(x0));
    let mut center = x0;
    for _ in 0..8 {
        let lo = (center - chart.half_width).max(chart.lo);
        let hi = (center + chart.half_width).min(chart.hi);
        let (x, fx) = brent_max(&ll, lo, hi, 1e-7);
        if fx > best_ll {
            best_x = x;
            best_ll = fx;
        }
        let edge = 1e-3 * (hi - lo);
        let at_lo = x - lo < edge && lo > chart.lo;
        let at_hi = hi - x < edge && hi < chart.hi;
        if !(at_lo || at_hi) {
            break;
        }
        center = x;
    }

    if !best_ll.is_finite() || best_ll <= independence_threshold(s.len()) {
        return indep;
    }
    match BivariateCopula::new(family, chart.to_theta(best_x)) {
        Ok(c) => (c, best_ll),
        Err(_) => indep,
    }
}

/// Brent's parabolic/golden-section search for a maximum on `[a, b]`.
fn brent_max(f: &impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> (f64, f64) {
    const GOLD: f64 = 0.381_966_011_250_105_1;
    let (mut a, mut b) = (a, b);
    let mut x = a + GOLD * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = -f(x);
    let (mut fw, mut fv) = (fx, fx);
    let (mut d, mut e) = (0.0_f64, 0.0_f64);
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let tol1 = tol * x.abs() + 1e-12;
        let tol2 = 2.0 * tol1;
        if (x - m).abs() <= tol2 - 0.5 * (b - a) {
            break;
        }
        let mut golden = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = 2.0 * (q - r);
            if q > 0.0 {
                p = -p;
            }
            q = q.abs();
            if p.abs() < (0.5 * q * e).abs() && p > q * (a - x) && p < q * (b - x) {
                e = d;
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if x < m { tol1 } else { -tol1 };
                }
                golden = false;
            }
        }
        if golden {
            e = if x < m { b - x } else { a - x };
            d = GOLD * e;
        }
        let u = if d.abs() >= tol1 { x + d } else { x + tol1.copysign(d) };
        let fu = -f(u);
        if fu <= fx {
            if u < x {
                b = x;
            } else {
                a = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    (x, -fx)
}

const TAIL_STEPS: usize = 10;
const TAIL_STEP: f64 = 0.02;

fn tail_grid(start: f64) -> [f64; TAIL_STEPS] {
    std::array::from_fn(|i| start + TAIL_STEP * i as f64)
}

/// Empirical copula `C_n(a, b)` at every grid pair, via a 2-D histogram.
fn empirical_on_grid(s: &PairSample, grid: &[f64; TAIL_STEPS]) -> [[f64; TAIL_STEPS]; TAIL_STEPS] {
    let bin = |x: f64| grid.iter().position(|&g| x <= g).unwrap_or(TAIL_STEPS);
    let mut hist = [[0u32; TAIL_STEPS + 1]; TAIL_STEPS + 1];
    for (&u, &v) in s.u.iter().zip(s.v) {
        hist[bin(u)][bin(v)] += 1;
    }
    let n = s.len() as f64;
    let mut out = [[0.0; TAIL_STEPS]; TAIL_STEPS];
    let mut cum = [[0u32; TAIL_STEPS]; TAIL_STEPS];
    for i in 0..TAIL_STEPS {
        for j in 0..TAIL_STEPS {
            let mut c = hist[i][j];
            if i > 0 {
                c += cum[i - 1][j];
            }
            if j > 0 {
                c += cum[i][j - 1];
            }
            if i > 0 && j > 0 {
                c -= cum[i - 1][j - 1];
            }
            cum[i][j] = c;
            out[i][j] = c as f64 / n;
        }
    }
    out
}

fn tail_distance(c: &BivariateCopula, grid: &[f64; TAIL_STEPS], emp: &[[f64; TAIL_STEPS]; TAIL_STEPS]) -> f64 {
    let mut acc = 0.0;
    for (i, &a) in grid.iter().enumerate() {
        for (j, &b) in grid.iter().enumerate() {
            let d = emp[i][j] - c.cdf_unchecked(a, b);
            acc += d * d;
        }
    }
    acc.sqrt()
}

/// Fits every family and picks a winner by majority over three votes:
/// highest log-likelihood, closest lower-tail fit, closest upper-tail fit.
/// Without a majority the likelihood vote decides.
pub fn select_family(s: &PairSample) -> Result<BivariateCopula> {
    check_rows(s)?;
    let tau = tau_a(s.u, s.v)?;
    Ok(select_with_tau(s, tau).0)
}

/// Returns the winner and its log-likelihood.
pub(crate) fn select_with_tau(s: &PairSample, tau: f64) -> (BivariateCopula, f64) {
    let mut cands: Vec<(BivariateCopula, f64)> = vec![(BivariateCopula::INDEPENDENCE, 0.0)];
    for family in [
        CopulaFamily::Gaussian,
        CopulaFamily::Clayton,
        CopulaFamily::Frank,
        CopulaFamily::Gumbel,
    ] {
        let fit = fit_with_tau(family, s, tau);
        if !fit.0.is_independence() {
            cands.push(fit);
        }
    }
    if cands.len() == 1 {
        return cands[0];
    }

    let by_ll = argmax(cands.iter().map(|c| c.1));
    let lower = tail_grid(TAIL_STEP);
    let upper = tail_grid(0.8);
    let emp_lo = empirical_on_grid(s, &lower);
    let emp_hi = empirical_on_grid(s, &upper);
    let by_lower = argmax(cands.iter().map(|c| -tail_distance(&c.0, &lower, &emp_lo)));
    let by_upper = argmax(cands.iter().map(|c| -tail_distance(&c.0, &upper, &emp_hi)));

    let winner = if by_lower == by_upper { by_lower } else { by_ll };
    cands[winner]
}

/// First index of the largest value.
fn argmax(xs: impl Iterator<Item = f64>) -> usize {
    let mut best = (0, f64::NEG_INFINITY);
    for (i, x) in xs.enumerate() {
        if x > best.1 {
            best = (i, x);
        }
    }
    best.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Draws from `c` by conditional inversion: `v` uniform, `u = h^{-1}(w | v)`.
    fn draw(c: &BivariateCopula, n: usize, seed: u64) -> (Vec<f64>, Vec<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut u = Vec::with_capacity(n);
        let mut v = Vec::with_capacity(n);
        for _ in 0..n {
            let b: f64 = rng.gen_range(1e-9..1.0 - 1e-9);
            let w: f64 = rng.gen_range(1e-9..1.0 - 1e-9);
            u.push(c.h_inverse(w, b).unwrap());
            v.push(b);
        }
        (u, v)
    }

    #[test]
    fn brent_finds_quadratic_peak() {
        let (x, fx) = brent_max(&|x: f64| -(x - 0.3) * (x - 0.3) + 2.0, -1.0, 1.0, 1e-10);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-12);
    }

    #[test]
    fn empirical_grid_matches_direct_count() {
        let (u, v) = draw(&BivariateCopula::new(CopulaFamily::Clayton, 2.0).unwrap(), 500, 3);
        let s = PairSample::new(&u, &v).unwrap();
        let grid = tail_grid(TAIL_STEP);
        let emp = empirical_on_grid(&s, &grid);
        for (i, &a) in grid.iter().enumerate() {
            for (j, &b) in grid.iter().enumerate() {
                let direct = u.iter().zip(&v).filter(|(&x, &y)| x <= a && y <= b).count();
                assert!((emp[i][j] - direct as f64 / 500.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn clayton_mle_recovers_parameter() {
        let (u, v) = draw(&BivariateCopula::new(CopulaFamily::Clayton, 1.7).unwrap(), 5000, 11);
        let c = fit_mle(CopulaFamily::Clayton, &PairSample::new(&u, &v).unwrap()).unwrap();
        assert_eq!(c.family(), CopulaFamily::Clayton);
        assert!((1.5..=1.9).contains(&c.theta()), "{}", c.theta());
    }

    #[test]
    fn gaussian_mle_recovers_parameter() {
        let (u, v) = draw(&BivariateCopula::new(CopulaFamily::Gaussian, 0.8).unwrap(), 5000, 12);
        let c = fit_mle(CopulaFamily::Gaussian, &PairSample::new(&u, &v).unwrap()).unwrap();
        assert!((0.77..=0.83).contains(&c.theta()), "{}", c.theta());
    }

    #[test]
    fn mle_not_worse_than_initial_value() {
        for (f, t) in [
            (CopulaFamily::Gumbel, 1.6),
            (CopulaFamily::Frank, -4.0),
            (CopulaFamily::Clayton, 0.8),
        ] {
            let (u, v) = draw(&BivariateCopula::new(f, t).unwrap(), 400, 5);
            let s = PairSample::new(&u, &v).unwrap();
            let tau = tau_a(&u, &v).unwrap();
            let init = BivariateCopula::new(f, tau_to_theta(f, tau).unwrap()).unwrap();
            let fitted = fit_mle(f, &s).unwrap();
            assert!(loglik(&fitted, &s) >= loglik(&init, &s) - 1e-9);
        }
    }

    #[test]
    fn independent_data_selects_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let u: Vec<f64> = (0..2000).map(|_| rng.gen_range(0.001..0.999)).collect();
        let v: Vec<f64> = (0..2000).map(|_| rng.gen_range(0.001..0.999)).collect();
        let s = PairSample::new(&u, &v).unwrap();
        assert!(select_family(&s).unwrap().is_independence());
        for f in CopulaFamily::ALL {
            assert!(fit_mle(f, &s).unwrap().is_independence(), "{f}");
        }
    }

    #[test]
    fn selects_tail_families() {
        for (f, seed) in [(CopulaFamily::Clayton, 1), (CopulaFamily::Gumbel, 2)] {
            let (u, v) = draw(&BivariateCopula::new(f, 3.0).unwrap(), 2000, seed);
            let got = select_family(&PairSample::new(&u, &v).unwrap()).unwrap();
            assert_eq!(got.family(), f);
        }
    }

    #[test]
    fn loglik_of_single_point() {
        let c = BivariateCopula::new(CopulaFamily::Clayton, 1.7).unwrap();
        let s = PairSample::new(&[0.2], &[0.2]);
        assert!(s.is_err());
        let u = [0.2, 0.2];
        let s = PairSample::new(&u, &u).unwrap();
        let want = 2.0 * c.log_density(0.2, 0.2).unwrap();
        assert!((loglik(&c, &s) - want).abs() < 1e-12);
        assert_eq!(loglik(&BivariateCopula::INDEPENDENCE, &s), 0.0);
    }

    #[test]
    fn short_samples_are_rejected() {
        let u = [0.1, 0.5, 0.9];
        let s = PairSample::new(&u, &u).unwrap();
        assert!(fit_mle(CopulaFamily::Gaussian, &s).is_err());
    }
}
