//! Strictly increasing links g: (0,1) -> R used by the quantile recursion.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math;

/// Link function choice. Logit is the default: it keeps the conditional
/// quantile inside (0,1) by construction and makes the recursion's link-scale
/// algebra exact.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum LinkFunction {
    #[default]
    Logit,
    Probit,
    Cloglog,
}

impl LinkFunction {
    /// g(u) for u in (0,1).
    pub fn g(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        Ok(self.g_unchecked(u))
    }

    /// g^{-1}(eta); output clamped just inside (0,1) so downstream
    /// log(y(1-y)) terms stay finite.
    pub fn g_inv(&self, eta: f64) -> Result<f64> {
        if !eta.is_finite() {
            return Err(Error::Domain(format!(
                "link inverse needs a finite argument, got {eta}"
            )));
        }
        Ok(self.g_inv_unchecked(eta))
    }

    /// g'(u) > 0 for u in (0,1).
    pub fn g_deriv(&self, u: f64) -> Result<f64> {
        check_unit(u)?;
        Ok(self.g_deriv_unchecked(u))
    }

    #[inline]
    pub(crate) fn g_unchecked(&self, u: f64) -> f64 {
        match self {
            LinkFunction::Logit => math::logit(u),
            LinkFunction::Probit => math::norm_quantile(u),
            LinkFunction::Cloglog => (-(-u).ln_1p()).ln(),
        }
    }

    #[inline]
    pub(crate) fn g_inv_unchecked(&self, eta: f64) -> f64 {
        match self {
            LinkFunction::Logit => math::logistic(eta),
            LinkFunction::Probit => math::clamp_unit(math::norm_cdf(eta)),
            LinkFunction::Cloglog => {
                let u = if eta > 700.0 { 1.0 } else { -(-eta.exp()).exp_m1() };
                math::clamp_unit(u)
            }
        }
    }

    #[inline]
    pub(crate) fn g_deriv_unchecked(&self, u: f64) -> f64 {
        match self {
            LinkFunction::Logit => 1.0 / (u * (1.0 - u)),
            LinkFunction::Probit => 1.0 / math::norm_pdf(math::norm_quantile(u)),
            LinkFunction::Cloglog => -1.0 / ((1.0 - u) * (-u).ln_1p()),
        }
    }
}

fn check_unit(u: f64) -> Result<()> {
    if u.is_finite() && u > 0.0 && u < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "link argument must lie in (0,1), got {u}"
        )))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const LINKS: [LinkFunction; 3] =
        [LinkFunction::Logit, LinkFunction::Probit, LinkFunction::Cloglog];

    #[test]
    fn logit_known_values() {
        let g = LinkFunction::Logit;
        assert_eq!(g.g(0.5).unwrap(), 0.0);
        // May 2000 stored-energy datum on the link scale.
        assert_relative_eq!(g.g(0.536800).unwrap(), 0.14746665939868655, epsilon = 1e-14);
        assert_relative_eq!(g.g_inv(0.14746665939868655).unwrap(), 0.536800, epsilon = 1e-14);
        assert_eq!(g.g_inv(0.0).unwrap(), 0.5);
        assert_relative_eq!(g.g_deriv(0.5).unwrap(), 4.0, max_relative = 1e-15);
        assert_relative_eq!(g.g_deriv(0.25).unwrap(), 16.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn probit_known_values() {
        let g = LinkFunction::Probit;
        assert_relative_eq!(g.g(0.975).unwrap(), 1.959963984540054, max_relative = 1e-10);
        assert_relative_eq!(g.g_deriv(0.5).unwrap(), 2.5066282746310002, max_relative = 1e-12);
    }

    #[test]
    fn cloglog_known_values() {
        let g = LinkFunction::Cloglog;
        assert_relative_eq!(g.g_inv(0.0).unwrap(), 1.0 - (-1.0f64).exp(), max_relative = 1e-14);
    }

    #[test]
    fn roundtrip_identity() {
        for link in LINKS {
            for i in 0..1000 {
                let u = 1e-9 + (1.0 - 2e-9) * (i as f64 + 0.5) / 1000.0;
                let back = link.g_inv(link.g(u).unwrap()).unwrap();
                assert!(
                    (back - u).abs() < 1e-10,
                    "{link:?}: u={u}, roundtrip={back}"
                );
            }
        }
    }

    #[test]
    fn monotone_with_positive_derivative() {
        for link in LINKS {
            let mut prev = f64::NEG_INFINITY;
            for i in 0..10_000 {
                let u = (i as f64 + 0.5) / 10_000.0;
                let v = link.g(u).unwrap();
                assert!(v > prev, "{link:?} not increasing at u={u}");
                assert!(link.g_deriv(u).unwrap() > 0.0);
                prev = v;
            }
        }
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let h = 1e-7;
        for link in LINKS {
            for &u in &[0.05, 0.2, 0.5, 0.8, 0.95] {
                let fd = (link.g(u + h).unwrap() - link.g(u - h).unwrap()) / (2.0 * h);
                assert_relative_eq!(link.g_deriv(u).unwrap(), fd, max_relative = 1e-7);
            }
        }
    }

    #[test]
    fn inverse_saturates_inside_open_interval() {
        for link in LINKS {
            for &eta in &[-1e6, -50.0, 0.0, 50.0, 1e6] {
                let u = link.g_inv(eta).unwrap();
                assert!(u > 0.0 && u < 1.0, "{link:?} at eta={eta} gave {u}");
            }
        }
    }

    #[test]
    fn domain_errors() {
        for link in LINKS {
            assert!(link.g(0.0).is_err());
            assert!(link.g(1.0).is_err());
            assert!(link.g(-0.2).is_err());
            assert!(link.g_deriv(1.0).is_err());
            assert!(link.g_inv(f64::NAN).is_err());
            assert!(link.g_inv(f64::INFINITY).is_err());
        }
    }
}
