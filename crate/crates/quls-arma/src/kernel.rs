//! Symmetric base distributions on the real line.
//!
//! Every distribution on the unit interval in this crate is generated by a
//! symmetric kernel `Z` through a logit-type transform, so this module is the
//! numerical foundation for all of them: density, its first two derivatives,
//! CDF and quantile function.

use serde::Serialize;
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::math;

/// A symmetric kernel distribution: standard normal, or Student-t with fixed
/// degrees of freedom.
///
/// The degrees of freedom are a model constant chosen on a grid, never a free
/// optimization variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum SymmetricKernel {
    Normal,
    StudentT { dof: f64 },
}

impl SymmetricKernel {
    pub fn normal() -> Self {
        SymmetricKernel::Normal
    }

    /// Student-t kernel; `dof` must be a positive finite real.
    pub fn student_t(dof: f64) -> Result<Self> {
        if !(dof.is_finite() && dof > 0.0) {
            return Err(Error::Domain(format!(
                "student-t degrees of freedom must be positive and finite, got {dof}"
            )));
        }
        Ok(SymmetricKernel::StudentT { dof })
    }

    /// Density f_Z(z).
    pub fn pdf(&self, z: f64) -> Result<f64> {
        check_finite(z)?;
        Ok(self.eval().pdf(z))
    }

    /// log f_Z(z), computed directly so large |z| does not underflow to -inf.
    pub fn log_pdf(&self, z: f64) -> Result<f64> {
        check_finite(z)?;
        Ok(self.eval().log_pdf(z))
    }

    /// First derivative f_Z'(z); an odd function.
    pub fn pdf_deriv1(&self, z: f64) -> Result<f64> {
        check_finite(z)?;
        let ev = self.eval();
        Ok(ev.pdf(z) * ev.log_pdf_deriv(z))
    }

    /// Second derivative f_Z''(z); an even function.
    pub fn pdf_deriv2(&self, z: f64) -> Result<f64> {
        check_finite(z)?;
        let ev = self.eval();
        let f = ev.pdf(z);
        Ok(match *self {
            SymmetricKernel::Normal => f * (z * z - 1.0),
            SymmetricKernel::StudentT { dof } => {
                let s = dof + z * z;
                f * (dof + 1.0) * ((dof + 2.0) * z * z - dof) / (s * s)
            }
        })
    }

    /// Distribution function F_Z(z). Accepts +/- infinity.
    pub fn cdf(&self, z: f64) -> Result<f64> {
        if z.is_nan() {
            return Err(Error::Domain("cdf argument is NaN".into()));
        }
        if z == f64::INFINITY {
            return Ok(1.0);
        }
        if z == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        Ok(match *self {
            SymmetricKernel::Normal => math::norm_cdf(z),
            SymmetricKernel::StudentT { dof } => student_t_cdf(dof, z),
        })
    }

    /// Quantile function Q_Z(tau) for tau in (0,1); Q_Z(0.5) = 0 exactly.
    pub fn quantile(&self, tau: f64) -> Result<f64> {
        if !(tau.is_finite() && tau > 0.0 && tau < 1.0) {
            return Err(Error::Domain(format!(
                "quantile level must lie in (0,1), got {tau}"
            )));
        }
        Ok(match *self {
            SymmetricKernel::Normal => math::norm_quantile(tau),
            SymmetricKernel::StudentT { dof } => student_t_quantile(dof, tau),
        })
    }

    /// Precomputed evaluator for likelihood loops.
    pub(crate) fn eval(&self) -> DensityEval {
        match *self {
            SymmetricKernel::Normal => DensityEval {
                dof: f64::INFINITY,
                log_const: -0.5 * math::LN_2PI,
                normal: true,
            },
            SymmetricKernel::StudentT { dof } => DensityEval {
                dof,
                log_const: ln_gamma(0.5 * (dof + 1.0))
                    - ln_gamma(0.5 * dof)
                    - 0.5 * (dof * std::f64::consts::PI).ln(),
                normal: false,
            },
        }
    }
}

/// Kernel density evaluator with the normalizing constant precomputed; used
/// in the likelihood recursion where it is called once per observation.
#[derive(Debug, Clone, Copy)]
pub(crate) struct DensityEval {
    dof: f64,
    log_const: f64,
    normal: bool,
}

impl DensityEval {
    #[inline]
    pub fn log_pdf(&self, z: f64) -> f64 {
        if self.normal {
            self.log_const - 0.5 * z * z
        } else {
            self.log_const - 0.5 * (self.dof + 1.0) * (z * z / self.dof).ln_1p()
        }
    }

    #[inline]
    pub fn pdf(&self, z: f64) -> f64 {
        self.log_pdf(z).exp()
    }

    /// d/dz log f_Z(z) = f_Z'(z) / f_Z(z).
    #[inline]
    pub fn log_pdf_deriv(&self, z: f64) -> f64 {
        if self.normal {
            -z
        } else {
            -(self.dof + 1.0) * z / (self.dof + z * z)
        }
    }
}

fn check_finite(z: f64) -> Result<()> {
    if z.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("kernel argument must be finite, got {z}")))
    }
}

/// Student-t CDF through the regularized incomplete beta function.
fn student_t_cdf(dof: f64, z: f64) -> f64 {
    if z == 0.0 {
        return 0.5;
    }
    let x = dof / (dof + z * z);
    let tail = 0.5 * beta_reg(0.5 * dof, 0.5, x);
    if z > 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Student-t quantile: bracket by doubling, bisect, then polish with Newton
/// steps on the CDF, safeguarded inside the bracket.
fn student_t_quantile(dof: f64, tau: f64) -> f64 {
    if tau == 0.5 {
        return 0.0;
    }
    let (p, negate) = if tau < 0.5 { (1.0 - tau, true) } else { (tau, false) };

    let mut hi = 1.0;
    while student_t_cdf(dof, hi) < p && hi < 1e300 {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..40 {
        let mid = 0.5 * (lo + hi);
        if student_t_cdf(dof, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    let ev = SymmetricKernel::StudentT { dof }.eval();
    let mut z = 0.5 * (lo + hi);
    for _ in 0..20 {
        let err = student_t_cdf(dof, z) - p;
        if err > 0.0 {
            hi = z;
        } else if err < 0.0 {
            lo = z;
        }
        let step = err / ev.pdf(z);
        let mut next = z - step;
        if !(next > lo && next < hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - z).abs() <= 1e-15 * (1.0 + z.abs()) {
            z = next;
            break;
        }
        z = next;
    }

    if negate {
        -z
    } else {
        z
    }
}
