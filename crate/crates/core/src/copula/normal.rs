//! Standard normal CDF, quantile and bivariate CDF.
//!
//! `norm_cdf` is Hart's rational approximation (absolute error below 1e-14),
//! `norm_ppf` is Acklam's approximation polished by one Halley step, and
//! `bvn_lower` follows the Drezner-Wesolowsky scheme with Genz's double
//! precision refinements.
#![allow(clippy::excessive_precision)]

use std::f64::consts::PI;

const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

pub fn norm_pdf(x: f64) -> f64 {
    (-0.5 * x * x).exp() / SQRT_2PI
}

pub fn norm_cdf(x: f64) -> f64 {
    let xa = x.abs();
    let tail = if xa > 37.0 {
        0.0
    } else {
        let e = (-0.5 * xa * xa).exp();
        if xa < 7.071_067_811_865_47 {
            let mut num = 3.526_249_659_989_11e-2 * xa + 0.700_383_064_443_688;
            num = num * xa + 6.373_962_203_531_65;
            num = num * xa + 33.912_866_078_383;
            num = num * xa + 112.079_291_497_871;
            num = num * xa + 221.213_596_169_931;
            num = num * xa + 220.206_867_912_376;
            let mut den = 8.838_834_764_831_84e-2 * xa + 1.755_667_163_182_64;
            den = den * xa + 16.064_177_579_207;
            den = den * xa + 86.780_732_202_946_1;
            den = den * xa + 296.564_248_779_674;
            den = den * xa + 637.333_633_378_831;
            den = den * xa + 793.826_512_519_948;
            den = den * xa + 440.413_735_824_752;
            e * num / den
        } else {
            let mut b = xa + 0.65;
            b = xa + 4.0 / b;
            b = xa + 3.0 / b;
            b = xa + 2.0 / b;
            b = xa + 1.0 / b;
            e / b / SQRT_2PI
        }
    };
    if x > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

const PPF_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_690e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const PPF_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const PPF_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const PPF_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn ppf_tail(q: f64) -> f64 {
    let c = &PPF_C;
    let d = &PPF_D;
    (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5])
        / ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0)
}

/// Inverse of `norm_cdf`. Returns infinities at 0 and 1.
pub fn norm_ppf(p: f64) -> f64 {
    if p <= 0.0 {
        return f64::NEG_INFINITY;
    }
    if p >= 1.0 {
        return f64::INFINITY;
    }
    const LOW: f64 = 0.024_25;
    let x = if p < LOW {
        ppf_tail((-2.0 * p.ln()).sqrt())
    } else if p <= 1.0 - LOW {
        let (a, b) = (&PPF_A, &PPF_B);
        let q = p - 0.5;
        let r = q * q;
        (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q
            / (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0)
    } else {
        -ppf_tail((-2.0 * (1.0 - p).ln()).sqrt())
    };
    // one Halley step against the accurate CDF
    let e = norm_cdf(x) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

// Gauss-Legendre half rules (weight, abscissa) on [-1, 1] for 6, 12 and 20 points.
const GL6: [(f64, f64); 3] = [
    (0.171_324_492_379_170_5, -0.932_469_514_203_152_2),
    (0.360_761_573_048_138_4, -0.661_209_386_466_264_7),
    (0.467_913_934_572_690_4, -0.238_619_186_083_197_0),
];
const GL12: [(f64, f64); 6] = [
    (0.471_753_363_865_117_7e-1, -0.981_560_634_246_719_1),
    (0.106_939_325_995_318_3, -0.904_117_256_370_475_0),
    (0.160_078_328_543_346_4, -0.769_902_674_194_305_0),
    (0.203_167_426_723_065_9, -0.587_317_954_286_617_1),
    (0.233_492_536_538_354_7, -0.367_831_498_998_180_2),
    (0.249_147_045_813_402_9, -0.125_233_408_511_469_2),
];
const GL20: [(f64, f64); 10] = [
    (0.176_140_071_391_521_2e-1, -0.993_128_599_185_094_9),
    (0.406_014_298_003_869_4e-1, -0.963_971_927_277_913_8),
    (0.626_720_483_341_090_6e-1, -0.912_234_428_251_325_9),
    (0.832_767_415_767_047_5e-1, -0.839_116_971_822_218_8),
    (0.101_930_119_817_240_4, -0.746_331_906_460_150_8),
    (0.118_194_531_961_518_4, -0.636_053_680_726_515_0),
    (0.131_688_638_449_176_6, -0.510_867_001_950_827_1),
    (0.142_096_109_318_382_1, -0.373_706_088_715_419_6),
    (0.149_172_986_472_603_7, -0.227_785_851_141_645_1),
    (0.152_753_387_130_725_9, -0.765_265_211_334_973_3e-1),
];

/// Upper orthant probability P(X > h, Y > k) for a standard bivariate normal
/// with correlation `r`.
fn bvn_upper(h: f64, k: f64, r: f64) -> f64 {
    let rule: &[(f64, f64)] = if r.abs() < 0.3 {
        &GL6
    } else if r.abs() < 0.75 {
        &GL12
    } else {
        &GL20
    };
    let two_pi = 2.0 * PI;
    let mut k = k;
    let mut hk = h * k;
    if r.abs() < 0.925 {
        let mut bvn = 0.0;
        if r != 0.0 {
            let hs = 0.5 * (h * h + k * k);
            let asr = r.asin();
            for &(w, x) in rule {
                for sign in [-1.0, 1.0] {
                    let sn = (0.5 * asr * (sign * x + 1.0)).sin();
                    bvn += w * ((sn * hk - hs) / (1.0 - sn * sn)).exp();
                }
            }
            bvn *= asr / (2.0 * two_pi);
        }
        return bvn + norm_cdf(-h) * norm_cdf(-k);
    }
    if r < 0.0 {
        k = -k;
        hk = -hk;
    }
    let mut bvn = 0.0;
    if r.abs() < 1.0 {
        let a_s = (1.0 - r) * (1.0 + r);
        let mut a = a_s.sqrt();
        let b_s = (h - k) * (h - k);
        let c = (4.0 - hk) / 8.0;
        let d = (12.0 - hk) / 16.0;
        let asr = -0.5 * (b_s / a_s + hk);
        if asr > -100.0 {
            bvn = a * asr.exp() * (1.0 - c * (b_s - a_s) * (1.0 - d * b_s / 5.0) / 3.0 + c * d * a_s * a_s / 5.0);
        }
        if -hk < 100.0 {
            let b = b_s.sqrt();
            bvn -= (-0.5 * hk).exp()
                * two_pi.sqrt()
                * norm_cdf(-b / a)
                * b
                * (1.0 - c * b_s * (1.0 - d * b_s / 5.0) / 3.0);
        }
        a *= 0.5;
        for &(w, x) in rule {
            for sign in [-1.0, 1.0] {
                let xs = (a * (sign * x + 1.0)).powi(2);
                let rs = (1.0 - xs).sqrt();
                let asr = -0.5 * (b_s / xs + hk);
                if asr > -100.0 {
                    bvn += a
                        * w
                        * asr.exp()
                        * ((-hk * (1.0 - rs) / (2.0 * (1.0 + rs))).exp() / rs - (1.0 + c * xs * (1.0 + d * xs)));
                }
            }
        }
        bvn /= -two_pi;
    }
    if r > 0.0 {
        bvn + norm_cdf(-h.max(k))
    } else {
        let mut out = -bvn;
        if k > h {
            if h < 0.0 {
                out += norm_cdf(k) - norm_cdf(h);
            } else {
                out += norm_cdf(-h) - norm_cdf(-k);
            }
        }
        out
    }
}

/// Lower orthant probability P(X < x, Y < y) for correlation `r`.
pub fn bvn_lower(x: f64, y: f64, r: f64) -> f64 {
    if x == f64::NEG_INFINITY || y == f64::NEG_INFINITY {
        return 0.0;
    }
    if x == f64::INFINITY {
        return norm_cdf(y);
    }
    if y == f64::INFINITY {
        return norm_cdf(x);
    }
    bvn_upper(-x, -y, r).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cdf_reference_values() {
        // values from high-precision quadrature
        assert!((norm_cdf(0.0) - 0.5).abs() < 1e-16);
        assert!((norm_cdf(1.0) - 0.841_344_746_068_542_9).abs() < 1e-15);
        assert!((norm_cdf(-2.5) - 0.006_209_665_325_776_132).abs() < 1e-16);
        assert!((norm_cdf(-6.0) / 9.865_876_450_376_98e-10 - 1.0).abs() < 1e-8);
    }

    #[test]
    fn ppf_inverts_cdf() {
        for i in 1..1000 {
            let p = i as f64 / 1000.0;
            assert!((norm_cdf(norm_ppf(p)) - p).abs() < 1e-15, "p={p}");
        }
        for p in [1e-10, 1e-6, 1.0 - 1e-6, 1.0 - 1e-10] {
            let x = norm_ppf(p);
            assert!(((norm_cdf(x) - p) / p.min(1.0 - p)).abs() < 1e-6);
        }
    }

    fn bvn_quadrature(x: f64, y: f64, r: f64) -> f64 {
        // integrate phi(t) * Phi((x - r t)/sqrt(1-r^2)) over t < y with Simpson's rule
        let lo = -9.0_f64;
        let hi = y;
        let n = 20_000;
        let s = (1.0 - r * r).sqrt();
        let f = |t: f64| norm_pdf(t) * norm_cdf((x - r * t) / s);
        let h = (hi - lo) / n as f64;
        let mut acc = f(lo) + f(hi);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            acc += w * f(lo + i as f64 * h);
        }
        acc * h / 3.0
    }

    #[test]
    fn bvn_matches_quadrature() {
        for &r in &[-0.97, -0.8, -0.5, -0.1, 0.0, 0.2, 0.6, 0.9, 0.95, 0.99] {
            for &(x, y) in &[(-1.5, 0.3), (0.0, 0.0), (1.2, -0.4), (2.0, 2.5), (-2.2, -1.9)] {
                let got = bvn_lower(x, y, r);
                let want = bvn_quadrature(x, y, r);
                assert!((got - want).abs() < 1e-10, "r={r} x={x} y={y}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn bvn_zero_correlation_is_product() {
        let got = bvn_lower(0.3, -0.7, 0.0);
        assert!((got - norm_cdf(0.3) * norm_cdf(-0.7)).abs() < 1e-16);
    }
}
