//! The QULS-ARMA(p,q) conditional-quantile model: linked recursion,
//! conditional log-likelihood, analytic score and Hessian.
//!
//! On the link scale the model is
//!
//! ```text
//! g(q_t) = alpha + x_t'beta
//!        + sum_i phi_i [ g(y_{t-i}) - x_{t-i}'beta ]
//!        + sum_j theta_j r_{t-j},        r_t = g(y_t) - g(q_t),
//! ```
//!
//! with the first m = max(p,q) observations initializing the recursion
//! (r_t = 0 and eta_t = g(y_t) there). Conditionally on the past, y_t follows
//! the unit-log-symmetric law whose tau-quantile is q_t.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::SymmetricKernel;
use crate::link::LinkFunction;
use crate::math;

/// Model orders, covariate count, link, kernel and the fixed quantile level.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ModelSpec {
    pub p: usize,
    pub q: usize,
    pub k: usize,
    pub link: LinkFunction,
    pub kernel: SymmetricKernel,
    pub tau: f64,
}

impl ModelSpec {
    pub fn new(
        p: usize,
        q: usize,
        k: usize,
        link: LinkFunction,
        kernel: SymmetricKernel,
        tau: f64,
    ) -> Result<Self> {
        if !(tau.is_finite() && tau > 0.0 && tau < 1.0) {
            return Err(Error::Domain(format!("tau must lie in (0,1), got {tau}")));
        }
        Ok(ModelSpec { p, q, k, link, kernel, tau })
    }

    /// Number of observations consumed by initialization.
    pub fn m(&self) -> usize {
        self.p.max(self.q)
    }

    /// Full parameter dimension: alpha, beta, phi, theta, sigma.
    pub fn dim(&self) -> usize {
        2 + self.k + self.p + self.q
    }

    /// Parameter names in canonical vector order.
    pub fn param_names(&self) -> Vec<String> {
        let mut names = vec!["alpha".to_string()];
        names.extend((1..=self.k).map(|i| format!("beta{i}")));
        names.extend((1..=self.p).map(|i| format!("phi{i}")));
        names.extend((1..=self.q).map(|i| format!("theta{i}")));
        names.push("sigma".to_string());
        names
    }

    fn check_params(&self, params: &ParamVector) -> Result<()> {
        if params.beta.len() != self.k || params.phi.len() != self.p || params.theta.len() != self.q
        {
            return Err(Error::Domain(format!(
                "parameter shape (k={}, p={}, q={}) does not match spec (k={}, p={}, q={})",
                params.beta.len(),
                params.phi.len(),
                params.theta.len(),
                self.k,
                self.p,
                self.q
            )));
        }
        Ok(())
    }
}

/// The full estimable parameter set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParamVector {
    pub alpha: f64,
    pub beta: Vec<f64>,
    pub phi: Vec<f64>,
    pub theta: Vec<f64>,
    pub sigma: f64,
}

impl ParamVector {
    pub fn new(
        alpha: f64,
        beta: Vec<f64>,
        phi: Vec<f64>,
        theta: Vec<f64>,
        sigma: f64,
    ) -> Result<Self> {
        let all_finite = alpha.is_finite()
            && beta.iter().all(|v| v.is_finite())
            && phi.iter().all(|v| v.is_finite())
            && theta.iter().all(|v| v.is_finite());
        if !all_finite {
            return Err(Error::Domain("parameters must all be finite".into()));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Domain(format!("sigma must be positive, got {sigma}")));
        }
        Ok(ParamVector { alpha, beta, phi, theta, sigma })
    }

    pub fn dim(&self) -> usize {
        2 + self.beta.len() + self.phi.len() + self.theta.len()
    }

    /// Canonical layout: [alpha, beta.., phi.., theta.., sigma].
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.dim());
        v.push(self.alpha);
        v.extend_from_slice(&self.beta);
        v.extend_from_slice(&self.phi);
        v.extend_from_slice(&self.theta);
        v.push(self.sigma);
        v
    }

    pub fn from_vec(spec: &ModelSpec, v: &[f64]) -> Result<Self> {
        if v.len() != spec.dim() {
            return Err(Error::Domain(format!(
                "parameter vector length {} does not match spec dimension {}",
                v.len(),
                spec.dim()
            )));
        }
        let (k, p, q) = (spec.k, spec.p, spec.q);
        ParamVector::new(
            v[0],
            v[1..1 + k].to_vec(),
            v[1 + k..1 + k + p].to_vec(),
            v[1 + k + p..1 + k + p + q].to_vec(),
            v[1 + k + p + q],
        )
    }
}

/// Observations on (0,1) with an aligned covariate matrix.
#[derive(Debug, Clone, Serialize)]
pub struct BoundedSeries {
    y: Vec<f64>,
    covariates: Vec<f64>,
    k: usize,
    labels: Option<Vec<String>>,
}

impl BoundedSeries {
    /// `covariates` is row-major with `k` columns and one row per observation.
    pub fn new(
        y: Vec<f64>,
        covariates: Vec<f64>,
        k: usize,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if y.is_empty() {
            return Err(Error::Input("series is empty".into()));
        }
        for (t, &v) in y.iter().enumerate() {
            if !(v.is_finite() && v > 0.0 && v < 1.0) {
                return Err(Error::Domain(format!(
                    "observation {} = {v} lies outside (0,1)",
                    t + 1
                )));
            }
        }
        if covariates.len() != y.len() * k {
            return Err(Error::Input(format!(
                "covariate matrix has {} entries, expected {} ({} rows x {} columns)",
                covariates.len(),
                y.len() * k,
                y.len(),
                k
            )));
        }
        if covariates.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("covariates must be finite".into()));
        }
        if let Some(ref l) = labels {
            if l.len() != y.len() {
                return Err(Error::Input("label count does not match series length".into()));
            }
        }
        Ok(BoundedSeries { y, covariates, k, labels })
    }

    pub fn without_covariates(y: Vec<f64>) -> Result<Self> {
        BoundedSeries::new(y, Vec::new(), 0, None)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn covariates(&self) -> &[f64] {
        &self.covariates
    }

    pub fn covariate_row(&self, t: usize) -> &[f64] {
        &self.covariates[t * self.k..(t + 1) * self.k]
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    /// The first `len` observations with their covariate rows and labels.
    pub fn prefix(&self, len: usize) -> Result<Self> {
        if len == 0 || len > self.len() {
            return Err(Error::Input(format!(
                "prefix length {len} outside 1..={}",
                self.len()
            )));
        }
        BoundedSeries::new(
            self.y[..len].to_vec(),
            self.covariates[..len * self.k].to_vec(),
            self.k,
            self.labels.as_ref().map(|l| l[..len].to_vec()),
        )
    }
}

/// Paths produced by the linked-quantile recursion.
#[derive(Debug, Clone, Serialize)]
pub struct RecursionState {
    /// Linked conditional quantiles eta_t = g(q_t); g(y_t) for t <= m.
    pub eta: Vec<f64>,
    /// Conditional quantiles q_t = g^{-1}(eta_t).
    pub q_tau: Vec<f64>,
    /// Link-scale innovations r_t = g(y_t) - eta_t; zero for t <= m.
    pub r: Vec<f64>,
}

/// One step of the linked recursion; shared by the model and the simulator
/// so both produce bit-identical paths on shared inputs.
#[inline]
pub(crate) fn eta_step(params: &ParamVector, t: usize, xb: &[f64], gy: &[f64], r: &[f64]) -> f64 {
    let mut eta = params.alpha + xb[t];
    for (i, &phi) in params.phi.iter().enumerate() {
        let s = t - i - 1;
        eta += phi * (gy[s] - xb[s]);
    }
    for (j, &theta) in params.theta.iter().enumerate() {
        eta += theta * r[t - j - 1];
    }
    eta
}

/// x_t'beta for every row.
pub(crate) fn linear_predictor(data: &BoundedSeries, beta: &[f64]) -> Vec<f64> {
    let n = data.len();
    if data.k() == 0 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|t| {
            data.covariate_row(t)
                .iter()
                .zip(beta)
                .map(|(x, b)| x * b)
                .sum()
        })
        .collect()
}

fn validate(spec: &ModelSpec, params: &ParamVector, data: &BoundedSeries) -> Result<()> {
    spec.check_params(params)?;
    if data.k() != spec.k {
        return Err(Error::Input(format!(
            "series has {} covariate columns, spec expects {}",
            data.k(),
            spec.k
        )));
    }
    if data.len() <= spec.m() {
        return Err(Error::InsufficientData { min: spec.m(), len: data.len() });
    }
    Ok(())
}

/// Runs the linked recursion over the sample.
pub fn run_recursion(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &BoundedSeries,
) -> Result<RecursionState> {
    validate(spec, params, data)?;
    let n = data.len();
    let m = spec.m();
    let link = spec.link;

    let gy: Vec<f64> = data.y().iter().map(|&y| link.g_unchecked(y)).collect();
    let xb = linear_predictor(data, &params.beta);

    let mut eta = vec![0.0; n];
    let mut q_tau = vec![0.0; n];
    let mut r = vec![0.0; n];

    for t in 0..m {
        eta[t] = gy[t];
        q_tau[t] = data.y()[t];
        r[t] = 0.0;
    }
    for t in m..n {
        let e = eta_step(params, t, &xb, &gy, &r);
        if !e.is_finite() {
            return Err(Error::Generation { t: t + 1 });
        }
        eta[t] = e;
        q_tau[t] = link.g_inv_unchecked(e);
        r[t] = gy[t] - e;
    }

    Ok(RecursionState { eta, q_tau, r })
}

#[inline]
fn w_at(y: f64, q: f64, sigma: f64, q_z_tau: f64) -> f64 {
    (math::logit(y) - math::logit(q)) / sigma + q_z_tau
}

/// Conditional log-likelihood of observations m+1..n, additive constants
/// included so values are comparable across kernels.
pub fn log_likelihood(spec: &ModelSpec, params: &ParamVector, data: &BoundedSeries) -> Result<f64> {
    let state = run_recursion(spec, params, data)?;
    let m = spec.m();
    let q_z_tau = spec.kernel.quantile(spec.tau)?;
    let ev = spec.kernel.eval();
    let ln_sigma = params.sigma.ln();

    let mut ll = 0.0;
    for t in m..data.len() {
        let y = data.y()[t];
        let w = w_at(y, state.q_tau[t], params.sigma, q_z_tau);
        let contrib = -ln_sigma - y.ln() - (-y).ln_1p() + ev.log_pdf(w);
        if !contrib.is_finite() {
            return Err(Error::NonFiniteLogLik { t: t + 1 });
        }
        ll += contrib;
    }
    Ok(ll)
}

/// The standardized kernel arguments w_t, t = m+1..n.
pub fn w_values(spec: &ModelSpec, params: &ParamVector, data: &BoundedSeries) -> Result<Vec<f64>> {
    let state = run_recursion(spec, params, data)?;
    let m = spec.m();
    let q_z_tau = spec.kernel.quantile(spec.tau)?;
    Ok((m..data.len())
        .map(|t| w_at(data.y()[t], state.q_tau[t], params.sigma, q_z_tau))
        .collect())
}

/// How the quantile-path derivatives are assembled for the score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreMethod {
    /// Exact gradient of the conditional log-likelihood: the moving-average
    /// feedback is differentiated through d r_{t-j} = -d eta_{t-j}.
    #[default]
    RecursiveChainRule,
    /// Treats lagged innovations as parameter-free and multiplies the
    /// theta_v derivative by an extra theta_v factor. Not the exact gradient
    /// whenever p > 0 or q > 0; kept for comparison only.
    Literal,
}

/// Analytic score (gradient of [`log_likelihood`]) in canonical layout.
pub fn score(spec: &ModelSpec, params: &ParamVector, data: &BoundedSeries) -> Result<Vec<f64>> {
    score_with_method(spec, params, data, ScoreMethod::RecursiveChainRule)
}

pub fn score_with_method(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &BoundedSeries,
    method: ScoreMethod,
) -> Result<Vec<f64>> {
    let state = run_recursion(spec, params, data)?;
    let n = data.len();
    let m = spec.m();
    let (k, p, q) = (spec.k, spec.p, spec.q);
    let d = spec.dim();
    let d_free = d - 1;
    let sigma = params.sigma;

    let gy: Vec<f64> = data.y().iter().map(|&y| spec.link.g_unchecked(y)).collect();
    let xb = linear_predictor(data, &params.beta);
    let q_z_tau = spec.kernel.quantile(spec.tau)?;
    let ev = spec.kernel.eval();

    // d eta_t / d theta for theta in (alpha, beta, phi, theta), row per t.
    let mut deta = vec![0.0; n * d_free];
    let phi_sum: f64 = params.phi.iter().sum();
    for t in m..n {
        let row = t * d_free;
        match method {
            ScoreMethod::RecursiveChainRule => {
                deta[row] = 1.0;
                for l in 0..k {
                    let mut v = data.covariate_row(t)[l];
                    for (i, &phi) in params.phi.iter().enumerate() {
                        v -= phi * data.covariate_row(t - i - 1)[l];
                    }
                    deta[row + 1 + l] = v;
                }
                for u in 0..p {
                    let s = t - u - 1;
                    deta[row + 1 + k + u] = gy[s] - xb[s];
                }
                for v in 0..q {
                    deta[row + 1 + k + p + v] = state.r[t - v - 1];
                }
                // d r_{t-j} = -d eta_{t-j}; rows before m are zero.
                for (j, &theta) in params.theta.iter().enumerate() {
                    let lag_row = (t - j - 1) * d_free;
                    for c in 0..d_free {
                        deta[row + c] -= theta * deta[lag_row + c];
                    }
                }
            }
            ScoreMethod::Literal => {
                deta[row] = 1.0 - phi_sum;
                for l in 0..k {
                    let mut v = data.covariate_row(t)[l];
                    for (i, &phi) in params.phi.iter().enumerate() {
                        v -= phi * data.covariate_row(t - i - 1)[l];
                    }
                    deta[row + 1 + l] = v;
                }
                for u in 0..p {
                    let s = t - u - 1;
                    deta[row + 1 + k + u] = gy[s] - xb[s];
                }
                for v in 0..q {
                    deta[row + 1 + k + p + v] = params.theta[v] * state.r[t - v - 1];
                }
            }
        }
    }

    let mut grad = vec![0.0; d];
    for t in m..n {
        let q_t = state.q_tau[t];
        let w = w_at(data.y()[t], q_t, sigma, q_z_tau);
        let lw = ev.log_pdf_deriv(w);
        // dw/d eta_t = -1 / (sigma q(1-q) g'(q)); the logit ratio cancels.
        let dw_deta = -1.0 / (sigma * q_t * (1.0 - q_t) * spec.link.g_deriv_unchecked(q_t));
        let row = t * d_free;
        for c in 0..d_free {
            grad[c] += lw * dw_deta * deta[row + c];
        }
        grad[d - 1] += lw * (-(w - q_z_tau) / sigma);
    }
    grad[d - 1] -= (n - m) as f64 / sigma;

    Ok(grad)
}

/// Observed-information Hessian: central finite differences of the analytic
/// score, symmetrized, with an internal asymmetry consistency check.
pub fn hessian(spec: &ModelSpec, params: &ParamVector, data: &BoundedSeries) -> Result<DMatrix<f64>> {
    validate(spec, params, data)?;
    let d = spec.dim();
    let theta0 = params.to_vec();
    let mut raw = DMatrix::zeros(d, d);

    for i in 0..d {
        let mut h = f64::EPSILON.cbrt() * theta0[i].abs().max(1.0);
        if i == d - 1 {
            h = h.min(0.5 * theta0[i]);
        }
        let mut plus = theta0.clone();
        plus[i] += h;
        let mut minus = theta0.clone();
        minus[i] -= h;
        let sp = score(spec, &ParamVector::from_vec(spec, &plus)?, data)?;
        let sm = score(spec, &ParamVector::from_vec(spec, &minus)?, data)?;
        for j in 0..d {
            raw[(j, i)] = (sp[j] - sm[j]) / (2.0 * h);
        }
    }

    let scale = raw.iter().fold(0.0_f64, |acc, v| acc.max(v.abs())).max(1.0);
    let mut asymmetry = 0.0_f64;
    for i in 0..d {
        for j in (i + 1)..d {
            asymmetry = asymmetry.max((raw[(i, j)] - raw[(j, i)]).abs());
        }
    }
    let tolerance = 1e-3 * scale;
    if asymmetry > tolerance {
        return Err(Error::AsymmetricHessian { asymmetry, tolerance });
    }

    let sym = (&raw + raw.transpose()) * 0.5;
    Ok(sym)
}

/// Closed-form Hessian for the pure-AR, normal-kernel, logit-link case.
/// Serves as an independent check on the finite-difference path.
pub fn hessian_analytic_ar_normal(
    spec: &ModelSpec,
    params: &ParamVector,
    data: &BoundedSeries,
) -> Result<DMatrix<f64>> {
    if spec.q != 0 || spec.kernel != SymmetricKernel::Normal || spec.link != LinkFunction::Logit {
        return Err(Error::Domain(
            "analytic hessian is available for the pure-AR normal-kernel logit-link case".into(),
        ));
    }
    let state = run_recursion(spec, params, data)?;
    let n = data.len();
    let m = spec.m();
    let (k, p) = (spec.k, spec.p);
    let d = spec.dim();
    let d_free = d - 1;
    let sigma = params.sigma;
    let q_z_tau = spec.kernel.quantile(spec.tau)?;

    let gy: Vec<f64> = data.y().iter().map(|&y| spec.link.g_unchecked(y)).collect();
    let xb = linear_predictor(data, &params.beta);

    let mut hess = DMatrix::zeros(d, d);
    let mut dw = vec![0.0; d_free];

    for t in m..n {
        let w = w_at(data.y()[t], state.q_tau[t], sigma, q_z_tau);

        // With the logit link dw/d eta_t = -1/sigma and, since q = 0, eta_t
        // is linear in every parameter except for the beta-phi cross terms.
        dw[0] = -1.0 / sigma;
        for l in 0..k {
            let mut v = data.covariate_row(t)[l];
            for (i, &phi) in params.phi.iter().enumerate() {
                v -= phi * data.covariate_row(t - i - 1)[l];
            }
            dw[1 + l] = -v / sigma;
        }
        for u in 0..p {
            let s = t - u - 1;
            dw[1 + k + u] = -(gy[s] - xb[s]) / sigma;
        }
        let dw_dsigma = -(w - q_z_tau) / sigma;

        for a in 0..d_free {
            for b in 0..d_free {
                hess[(a, b)] -= dw[a] * dw[b];
            }
            hess[(a, d - 1)] += dw[a] * (w / sigma - dw_dsigma);
            hess[(d - 1, a)] += dw[a] * (w / sigma - dw_dsigma);
        }
        // Second derivative of eta is zero except d2 eta / d beta_l d phi_u
        // = -x_{(t-u),l}, so d2 w = x_{(t-u),l} / sigma there.
        for l in 0..k {
            for u in 0..p {
                let d2w = data.covariate_row(t - u - 1)[l] / sigma;
                hess[(1 + l, 1 + k + u)] -= w * d2w;
                hess[(1 + k + u, 1 + l)] -= w * d2w;
            }
        }
        hess[(d - 1, d - 1)] -= dw_dsigma * dw_dsigma + w * 2.0 * (w - q_z_tau) / (sigma * sigma);
    }
    hess[(d - 1, d - 1)] += (n - m) as f64 / (sigma * sigma);

    Ok(hess)
}
