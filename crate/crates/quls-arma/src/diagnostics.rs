//! Residual-based adequacy checks: generalized Cox-Snell residuals,
//! quantile residuals, QQ-plot data, and a Kolmogorov-Smirnov test.
//!
//! Under a correctly specified model the fitted conditional CDF evaluated at
//! the observations is uniform, so the Cox-Snell transform is approximately
//! Exp(1) and the quantile transform approximately standard normal. The
//! distribution here is continuous, so the quantile residual needs no
//! randomization.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::math;
use crate::model::{w_values, BoundedSeries, ModelSpec, ParamVector};

/// Residual series for observations m+1..n.
#[derive(Debug, Clone, Serialize)]
pub struct ResidualSet {
    /// Generalized Cox-Snell residuals -log(1 - F_t(y_t)); Exp(1)-like.
    pub gcs: Vec<f64>,
    /// Quantile residuals Phi^{-1}(F_t(y_t)); N(0,1)-like.
    pub rq: Vec<f64>,
    /// Fitted conditional CDF values, clamped into (1e-12, 1 - 1e-12).
    pub fitted_cdf: Vec<f64>,
}

const CDF_CLAMP: f64 = 1e-12;

/// Computes the residual set at the given (typically fitted) parameters.
pub fn residuals(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &BoundedSeries,
) -> Result<ResidualSet> {
    let w = w_values(spec, params, data)?;
    let mut gcs = Vec::with_capacity(w.len());
    let mut rq = Vec::with_capacity(w.len());
    let mut fitted_cdf = Vec::with_capacity(w.len());
    for &wt in &w {
        let f = spec
            .kernel
            .cdf(wt)?
            .clamp(CDF_CLAMP, 1.0 - CDF_CLAMP);
        fitted_cdf.push(f);
        gcs.push(-(-f).ln_1p());
        rq.push(math::norm_quantile(f));
    }
    Ok(ResidualSet { gcs, rq, fitted_cdf })
}

/// Reference distribution for QQ plots.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QqReference {
    Exp1,
    StdNormal,
}

/// Sorted sample values paired with reference quantiles at the plotting
/// positions (i - 0.5) / n. Returned as (theoretical, empirical) pairs.
pub fn qq_data(values: &[f64], reference: QqReference) -> Result<Vec<(f64, f64)>> {
    if values.is_empty() {
        return Err(Error::Input("qq data requires a nonempty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    Ok(sorted
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            let p = (i as f64 + 0.5) / n;
            let q = match reference {
                QqReference::Exp1 => -(-p).ln_1p(),
                QqReference::StdNormal => math::norm_quantile(p),
            };
            (q, v)
        })
        .collect())
}

/// One-sample Kolmogorov-Smirnov test outcome.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct KsTest {
    pub statistic: f64,
    pub p_value: f64,
}

/// One-sample KS test of `values` against a continuous CDF, with the
/// asymptotic p-value (finite-sample corrected argument).
pub fn ks_test<F: Fn(f64) -> f64>(values: &[f64], cdf: F) -> Result<KsTest> {
    if values.is_empty() {
        return Err(Error::Input("ks test requires a nonempty sample".into()));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, v) in sorted.iter().enumerate() {
        let f = cdf(*v);
        d = d.max(f - i as f64 / n).max((i as f64 + 1.0) / n - f);
    }
    let lambda = (n.sqrt() + 0.12 + 0.11 / n.sqrt()) * d;
    let mut p = 0.0;
    for k in 1..=100 {
        let kf = k as f64;
        let term = 2.0 * (-1.0_f64).powi(k + 1) * (-2.0 * kf * kf * lambda * lambda).exp();
        p += term;
        if term.abs() < 1e-12 {
            break;
        }
    }
    Ok(KsTest { statistic: d, p_value: p.clamp(0.0, 1.0) })
}

/// Fitted conditional CDF values straight from the recursion, exposed for
/// probability-integral-transform checks.
pub fn fitted_cdf(spec: &ModelSpec, params: &ParamVector, data: &BoundedSeries) -> Result<Vec<f64>> {
    Ok(residuals(spec, params, data)?.fitted_cdf)
}
