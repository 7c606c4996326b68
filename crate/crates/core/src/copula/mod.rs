//! Parametric bivariate copulas: densities, distribution functions,
//! conditional distributions (h-functions) and their inverses.
//!
//! All families implemented here are exchangeable, so `h(u | v)` and
//! `h(v | u)` share one formula with the arguments swapped.

mod archimedean;
pub mod fit;
pub mod kendall;
pub mod normal;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Result, VineError};

pub use fit::{fit_mle, loglik, select_family, PairSample};
pub use kendall::kendall_tau;

/// Arguments are clamped to `[EPS, 1 - EPS]` before any log or power.
pub const EPS: f64 = 1e-10;

#[inline]
pub(crate) fn clamp_unit(x: f64) -> f64 {
    x.clamp(EPS, 1.0 - EPS)
}

fn check_open(x: f64) -> Result<()> {
    if x > 0.0 && x < 1.0 {
        Ok(())
    } else {
        Err(VineError::Domain { value: x })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CopulaFamily {
    Independence,
    Gaussian,
    Clayton,
    Frank,
    Gumbel,
}

impl CopulaFamily {
    pub const ALL: [CopulaFamily; 5] = [
        CopulaFamily::Independence,
        CopulaFamily::Gaussian,
        CopulaFamily::Clayton,
        CopulaFamily::Frank,
        CopulaFamily::Gumbel,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CopulaFamily::Independence => "independence",
            CopulaFamily::Gaussian => "gaussian",
            CopulaFamily::Clayton => "clayton",
            CopulaFamily::Frank => "frank",
            CopulaFamily::Gumbel => "gumbel",
        }
    }

    /// Whether `theta` lies in the family's parameter domain.
    pub fn admits(self, theta: f64) -> bool {
        if !theta.is_finite() {
            return false;
        }
        match self {
            CopulaFamily::Independence => true,
            CopulaFamily::Gaussian => theta > -1.0 && theta < 1.0,
            CopulaFamily::Clayton => theta > 0.0,
            CopulaFamily::Frank => theta != 0.0,
            CopulaFamily::Gumbel => theta >= 1.0,
        }
    }
}

impl fmt::Display for CopulaFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CopulaFamily {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        CopulaFamily::ALL
            .into_iter()
            .find(|f| f.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| format!("unknown copula family `{s}`"))
    }
}

/// A copula family together with its scalar parameter.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BivariateCopula {
    family: CopulaFamily,
    theta: f64,
}

impl BivariateCopula {
    pub const INDEPENDENCE: BivariateCopula = BivariateCopula {
        family: CopulaFamily::Independence,
        theta: 0.0,
    };

    /// The parameter of an Independence copula is ignored and stored as 0.
    pub fn new(family: CopulaFamily, theta: f64) -> Result<Self> {
        if family == CopulaFamily::Independence {
            return Ok(Self::INDEPENDENCE);
        }
        if !family.admits(theta) {
            return Err(VineError::Parameter { family, theta });
        }
        Ok(Self { family, theta })
    }

    pub fn family(&self) -> CopulaFamily {
        self.family
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn is_independence(&self) -> bool {
        self.family == CopulaFamily::Independence
    }

    pub fn density(&self, u: f64, v: f64) -> Result<f64> {
        Ok(self.log_density(u, v)?.exp())
    }

    pub fn log_density(&self, u: f64, v: f64) -> Result<f64> {
        check_open(u)?;
        check_open(v)?;
        Ok(self.ln_pdf(u, v))
    }

    /// Joint distribution function on the closed unit square.
    pub fn cdf(&self, u: f64, v: f64) -> Result<f64> {
        for x in [u, v] {
            if !(0.0..=1.0).contains(&x) {
                return Err(VineError::Domain { value: x });
            }
        }
        Ok(self.cdf_unchecked(u, v))
    }

    /// Conditional distribution of the first argument given the second,
    /// `h(u | v) = dC(u, v)/dv`.
    pub fn h(&self, u: f64, v: f64) -> Result<f64> {
        check_open(u)?;
        check_open(v)?;
        Ok(self.hfunc(u, v))
    }

    /// Solves `h(u | v) = p` for `u`.
    pub fn h_inverse(&self, p: f64, v: f64) -> Result<f64> {
        check_open(p)?;
        check_open(v)?;
        self.hinv(p, v)
    }

    /// Population Kendall's tau implied by the parameter.
    pub fn tau(&self) -> f64 {
        let t = self.theta;
        match self.family {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Gaussian => 2.0 / std::f64::consts::PI * t.asin(),
            CopulaFamily::Clayton => t / (t + 2.0),
            CopulaFamily::Frank => archimedean::frank_tau(t),
            CopulaFamily::Gumbel => 1.0 - 1.0 / t,
        }
    }

    pub(crate) fn ln_pdf(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (clamp_unit(u), clamp_unit(v));
        let t = self.theta;
        match self.family {
            CopulaFamily::Independence => 0.0,
            CopulaFamily::Gaussian => gaussian_ln_pdf_scores(t, normal::norm_ppf(u), normal::norm_ppf(v)),
            CopulaFamily::Clayton => archimedean::clayton_ln_pdf(t, u, v),
            CopulaFamily::Frank => archimedean::frank_ln_pdf(t, u, v),
            CopulaFamily::Gumbel => archimedean::gumbel_ln_pdf(t, u, v),
        }
    }

    pub(crate) fn cdf_unchecked(&self, u: f64, v: f64) -> f64 {
        if u <= 0.0 || v <= 0.0 {
            return 0.0;
        }
        if u >= 1.0 {
            return v;
        }
        if v >= 1.0 {
            return u;
        }
        let (uc, vc) = (clamp_unit(u), clamp_unit(v));
        let t = self.theta;
        let c = match self.family {
            CopulaFamily::Independence => u * v,
            CopulaFamily::Gaussian => normal::bvn_lower(normal::norm_ppf(uc), normal::norm_ppf(vc), t),
            CopulaFamily::Clayton => archimedean::clayton_cdf(t, uc, vc),
            CopulaFamily::Frank => archimedean::frank_cdf(t, uc, vc),
            CopulaFamily::Gumbel => archimedean::gumbel_cdf(t, uc, vc),
        };
        c.clamp(0.0, u.min(v))
    }

    pub(crate) fn hfunc(&self, u: f64, v: f64) -> f64 {
        let t = self.theta;
        let out = match self.family {
            CopulaFamily::Independence => return u,
            CopulaFamily::Gaussian => {
                let (x, y) = (normal::norm_ppf(clamp_unit(u)), normal::norm_ppf(clamp_unit(v)));
                normal::norm_cdf((x - t * y) / (1.0 - t * t).sqrt())
            }
            CopulaFamily::Clayton => archimedean::clayton_h(t, clamp_unit(u), clamp_unit(v)),
            CopulaFamily::Frank => archimedean::frank_h(t, clamp_unit(u), clamp_unit(v)),
            CopulaFamily::Gumbel => archimedean::gumbel_h(t, clamp_unit(u), clamp_unit(v)),
        };
        out.clamp(0.0, 1.0)
    }

    pub(crate) fn hinv(&self, p: f64, v: f64) -> Result<f64> {
        let t = self.theta;
        let (pc, vc) = (clamp_unit(p), clamp_unit(v));
        let u = match self.family {
            CopulaFamily::Independence => return Ok(p),
            CopulaFamily::Gaussian => {
                normal::norm_cdf(normal::norm_ppf(pc) * (1.0 - t * t).sqrt() + t * normal::norm_ppf(vc))
            }
            CopulaFamily::Clayton => archimedean::clayton_hinv(t, pc, vc),
            CopulaFamily::Frank => archimedean::frank_hinv(t, pc, vc),
            CopulaFamily::Gumbel => archimedean::gumbel_hinv(t, pc, vc)?,
        };
        Ok(clamp_unit(u))
    }
}

/// Gaussian copula log-density in terms of normal scores `x`, `y`.
pub(crate) fn gaussian_ln_pdf_scores(rho: f64, x: f64, y: f64) -> f64 {
    let r2 = 1.0 - rho * rho;
    -0.5 * r2.ln() - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)
}

/// Inverts the family's tau relation to give a starting parameter.
pub fn tau_to_theta(family: CopulaFamily, tau: f64) -> Result<f64> {
    let err = || VineError::TauRange { family, tau };
    if !(tau > -1.0 && tau < 1.0) {
        return Err(err());
    }
    match family {
        CopulaFamily::Independence => Ok(0.0),
        CopulaFamily::Gaussian => Ok((std::f64::consts::FRAC_PI_2 * tau).sin()),
        CopulaFamily::Clayton if tau > 0.0 => Ok(2.0 * tau / (1.0 - tau)),
        CopulaFamily::Gumbel if tau >= 0.0 => Ok(1.0 / (1.0 - tau)),
        CopulaFamily::Frank if tau != 0.0 => archimedean::frank_tau_inverse(tau).ok_or_else(err),
        _ => Err(err()),
    }
}
