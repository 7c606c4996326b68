//! Clayton, Frank and Gumbel formulas. Arguments arrive already clamped to
//! the open unit interval and parameters already validated.

use crate::error::{Result, VineError};

/// `ln(e^a + e^b - 1)` for `a, b >= 0`.
fn ln_expsum_m1(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    if m < 30.0 {
        (a.exp_m1() + b.exp_m1()).ln_1p()
    } else {
        m + ((a - m).exp() + (b - m).exp() - (-m).exp()).ln()
    }
}

fn ln_add_exp(a: f64, b: f64) -> f64 {
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub(super) fn clayton_ln_pdf(t: f64, u: f64, v: f64) -> f64 {
    let (lu, lv) = (u.ln(), v.ln());
    let ls = ln_expsum_m1(-t * lu, -t * lv);
    t.ln_1p() - (t + 1.0) * (lu + lv) - (1.0 / t + 2.0) * ls
}

pub(super) fn clayton_cdf(t: f64, u: f64, v: f64) -> f64 {
    (-ln_expsum_m1(-t * u.ln(), -t * v.ln()) / t).exp()
}

pub(super) fn clayton_h(t: f64, u: f64, v: f64) -> f64 {
    let lv = v.ln();
    let ls = ln_expsum_m1(-t * u.ln(), -t * lv);
    (-(t + 1.0) * lv - (1.0 / t + 1.0) * ls).exp()
}

pub(super) fn clayton_hinv(t: f64, p: f64, v: f64) -> f64 {
    let a = -t * v.ln();
    let q = (-t / (t + 1.0) * p.ln()).exp_m1();
    let ln_inner = if a < 30.0 {
        (a.exp() * q).ln_1p()
    } else {
        a + (q + (-a).exp()).ln()
    };
    (-ln_inner / t).exp()
}

/// `(ln x, ln y, ln S, A)` with `x = -ln u`, `S = x^t + y^t`, `A = S^(1/t)`.
fn gumbel_parts(t: f64, u: f64, v: f64) -> (f64, f64, f64, f64) {
    let lx = (-u.ln()).ln();
    let ly = (-v.ln()).ln();
    let ls = ln_add_exp(t * lx, t * ly);
    (lx, ly, ls, (ls / t).exp())
}

pub(super) fn gumbel_ln_pdf(t: f64, u: f64, v: f64) -> f64 {
    let (lx, ly, ls, a) = gumbel_parts(t, u, v);
    -a + (t - 1.0) * (lx + ly) + (1.0 / t - 2.0) * ls + (a + t - 1.0).ln() + lx.exp() + ly.exp()
}

pub(super) fn gumbel_cdf(t: f64, u: f64, v: f64) -> f64 {
    (-gumbel_parts(t, u, v).3).exp()
}

pub(super) fn gumbel_h(t: f64, u: f64, v: f64) -> f64 {
    let (_, ly, ls, a) = gumbel_parts(t, u, v);
    (-a + (1.0 / t - 1.0) * ls + (t - 1.0) * ly + ly.exp()).exp()
}

const ROOT_TOL: f64 = 1e-10;
const ROOT_MAX_ITER: usize = 200;

/// Safeguarded Newton on `h(u | v) = p`; the derivative of `h` in `u` is
/// the density.
pub(super) fn gumbel_hinv(t: f64, p: f64, v: f64) -> Result<f64> {
    let eps = super::EPS;
    let (mut lo, mut hi) = (eps, 1.0 - eps);
    if gumbel_h(t, lo, v) >= p {
        return Ok(lo);
    }
    if gumbel_h(t, hi, v) <= p {
        return Ok(hi);
    }
    let mut u = p;
    for _ in 0..ROOT_MAX_ITER {
        let f = gumbel_h(t, u, v) - p;
        if f.abs() < ROOT_TOL * 1e-3 {
            return Ok(u);
        }
        if f < 0.0 {
            lo = u;
        } else {
            hi = u;
        }
        if hi - lo < ROOT_TOL * 1e-5 {
            return Ok(0.5 * (lo + hi));
        }
        let newton = u - f / gumbel_ln_pdf(t, u, v).exp();
        u = if newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    Err(VineError::Convergence {
        iterations: ROOT_MAX_ITER,
    })
}

// Frank for t > 0 in terms of X = e^{-tu}, Y = e^{-tv}, E = e^{-t}. The
// denominator X + Y - XY - E is rewritten as a sum of two nonnegative terms.
fn frank_den(t: f64, u: f64, v: f64) -> f64 {
    let x = (-t * u).exp();
    let y = (-t * v).exp();
    -x * (-t * (1.0 - u)).exp_m1() - y * (-t * u).exp_m1()
}

fn frank_pos_ln_pdf(t: f64, u: f64, v: f64) -> f64 {
    t.ln() + (-(-t).exp_m1()).ln() - t * (u + v) - 2.0 * frank_den(t, u, v).ln()
}

fn frank_pos_cdf(t: f64, u: f64, v: f64) -> f64 {
    let r = (-t * u).exp_m1() * (-t * v).exp_m1() / (-t).exp_m1();
    -r.ln_1p() / t
}

fn frank_pos_h(t: f64, u: f64, v: f64) -> f64 {
    let y = (-t * v).exp();
    -y * (-t * u).exp_m1() / frank_den(t, u, v)
}

fn frank_pos_hinv(t: f64, p: f64, v: f64) -> f64 {
    let y = (-t * v).exp();
    -(p * (-t).exp_m1() / ((1.0 - p) * y + p)).ln_1p() / t
}

// Negative parameters use C_{-t}(u, v) = u - C_t(u, 1 - v).
pub(super) fn frank_ln_pdf(t: f64, u: f64, v: f64) -> f64 {
    if t > 0.0 {
        frank_pos_ln_pdf(t, u, v)
    } else {
        frank_pos_ln_pdf(-t, u, 1.0 - v)
    }
}

pub(super) fn frank_cdf(t: f64, u: f64, v: f64) -> f64 {
    if t > 0.0 {
        frank_pos_cdf(t, u, v)
    } else {
        u - frank_pos_cdf(-t, u, 1.0 - v)
    }
}

pub(super) fn frank_h(t: f64, u: f64, v: f64) -> f64 {
    if t > 0.0 {
        frank_pos_h(t, u, v)
    } else {
        frank_pos_h(-t, u, 1.0 - v)
    }
}

pub(super) fn frank_hinv(t: f64, p: f64, v: f64) -> f64 {
    if t > 0.0 {
        frank_pos_hinv(t, p, v)
    } else {
        frank_pos_hinv(-t, p, 1.0 - v)
    }
}

/// Debye function of order one, `D1(t) = (1/t) int_0^t s/(e^s - 1) ds`, t > 0.
fn debye1(t: f64) -> f64 {
    if t < 1.0 {
        // D1(t) = 1 - t/4 + sum_k B_2k t^2k / ((2k + 1) (2k)!), ratio below (t/2pi)^2
        const B2K_OVER_FACT: [f64; 8] = [
            1.0 / 12.0,
            -1.0 / 720.0,
            1.0 / 30_240.0,
            -1.0 / 1_209_600.0,
            1.0 / 47_900_160.0,
            -691.0 / 1_307_674_368_000.0,
            1.0 / 74_724_249_600.0,
            -3617.0 / 10_670_622_842_880_000.0,
        ];
        let t2 = t * t;
        let mut pow = t2;
        let mut acc = 1.0 - t / 4.0;
        for (k, c) in B2K_OVER_FACT.iter().enumerate() {
            acc += c * pow / (2 * k + 3) as f64;
            pow *= t2;
        }
        acc
    } else {
        // int_0^t = pi^2/6 - sum_k e^{-kt} (t/k + 1/k^2)
        let mut tail = 0.0;
        for k in 1..=60 {
            let kf = k as f64;
            let w = (-kf * t).exp();
            tail += w * (t / kf + 1.0 / (kf * kf));
            if w < 1e-18 {
                break;
            }
        }
        (std::f64::consts::PI.powi(2) / 6.0 - tail) / t
    }
}

pub(super) fn frank_tau(t: f64) -> f64 {
    let a = t.abs();
    let tau = if a < 0.1 {
        a / 9.0 - a.powi(3) / 900.0 + a.powi(5) / 52_920.0
    } else {
        1.0 - 4.0 / a * (1.0 - debye1(a))
    };
    tau.copysign(t)
}

/// Bisection in `ln t`; `None` when `|tau|` exceeds what `t <= 1e5` attains.
pub(super) fn frank_tau_inverse(tau: f64) -> Option<f64> {
    let target = tau.abs();
    let (mut lo, mut hi) = (1e-10_f64.ln(), 1e5_f64.ln());
    if frank_tau(hi.exp()) < target {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if frank_tau(mid.exp()) < target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-14 {
            break;
        }
    }
    Some((0.5 * (lo + hi)).exp().copysign(tau))
}
