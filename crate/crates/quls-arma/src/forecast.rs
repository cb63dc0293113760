//! Multi-step forecasting by the quantile recursion with future link-scale
//! innovations set to zero, plus out-of-sample accuracy measures.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{self, run_recursion, BoundedSeries, ModelSpec, ParamVector};

/// Point forecasts on both scales; `y_hat[i] = g_inv(eta_hat[i])`.
#[derive(Debug, Clone, Serialize)]
pub struct ForecastResult {
    pub horizon: usize,
    pub y_hat: Vec<f64>,
    pub eta_hat: Vec<f64>,
}

/// Iterated h-step forecast from the end of the sample. Future covariate
/// rows must be supplied (row-major, `h` rows) whenever the model has
/// covariates; lagged observations beyond the sample are replaced by their
/// forecasts and lagged innovations by zero.
pub fn forecast(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &BoundedSeries,
    h: usize,
    future_x: Option<&[f64]>,
) -> Result<ForecastResult> {
    if h == 0 {
        return Err(Error::Domain("forecast horizon must be at least 1".into()));
    }
    let k = spec.k;
    let future = future_x.unwrap_or(&[]);
    if future.len() != h * k {
        return Err(Error::Input(format!(
            "future covariates have {} entries, expected {} ({h} rows x {k} columns)",
            future.len(),
            h * k
        )));
    }

    let state = run_recursion(spec, params, data)?;
    let n = data.len();
    let link = spec.link;

    // Extended link-scale series: g(y_t) in-sample, eta_hat beyond (the
    // forecast's link value, since g(g_inv(eta)) = eta).
    let mut gy_ext: Vec<f64> = data.y().iter().map(|&y| link.g_unchecked(y)).collect();
    let mut r_ext = state.r.clone();
    r_ext.resize(n + h, 0.0);

    let mut xb_ext: Vec<f64> = model::linear_predictor(data, &params.beta);
    for j in 0..h {
        let xb: f64 = future[j * k..(j + 1) * k]
            .iter()
            .zip(&params.beta)
            .map(|(x, b)| x * b)
            .sum();
        xb_ext.push(xb);
    }

    let mut eta_hat = Vec::with_capacity(h);
    let mut y_hat = Vec::with_capacity(h);
    for j in 0..h {
        let t = n + j;
        let eta = model::eta_step(params, t, &xb_ext, &gy_ext, &r_ext);
        if !eta.is_finite() {
            return Err(Error::Generation { t: t + 1 });
        }
        eta_hat.push(eta);
        y_hat.push(link.g_inv_unchecked(eta));
        gy_ext.push(eta);
    }

    Ok(ForecastResult { horizon: h, y_hat, eta_hat })
}

/// Mean squared error and mean absolute percentage error of predictions
/// against realized values.
pub fn forecast_errors(actual: &[f64], predicted: &[f64]) -> Result<(f64, f64)> {
    if actual.is_empty() || actual.len() != predicted.len() {
        return Err(Error::Input(format!(
            "actual ({}) and predicted ({}) lengths must match and be nonempty",
            actual.len(),
            predicted.len()
        )));
    }
    if actual.iter().any(|&a| a == 0.0) {
        return Err(Error::Domain(
            "mean absolute percentage error is undefined for zero actual values".into(),
        ));
    }
    let n = actual.len() as f64;
    let mse = actual
        .iter()
        .zip(predicted)
        .map(|(a, p)| (a - p) * (a - p))
        .sum::<f64>()
        / n;
    let mape = 100.0
        * actual
            .iter()
            .zip(predicted)
            .map(|(a, p)| (a - p).abs() / a.abs())
            .sum::<f64>()
        / n;
    Ok((mse, mape))
}
