//! Conditional maximum-likelihood fitting.
//!
//! Parameters are optimized by BFGS on a transformed space (sigma enters as
//! log sigma, everything else unconstrained), with the analytic score as the
//! default gradient. Standard errors come from the inverse of the observed
//! information (negative Hessian) at the estimate. For the Student-t kernel
//! the degrees of freedom are selected in two steps over a fixed grid.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernel::SymmetricKernel;
use crate::math;
use crate::model::{
    self, log_likelihood, run_recursion, score, BoundedSeries, ModelSpec, ParamVector,
    RecursionState,
};
use crate::optim::{self, BfgsOptions};

/// Tuning knobs for [`fit`].
#[derive(Debug, Clone)]
pub struct FitConfig {
    pub max_iter: usize,
    /// Convergence threshold on the gradient sup-norm (transformed scale).
    pub grad_tol: f64,
    /// Convergence threshold on the parameter step sup-norm.
    pub param_tol: f64,
    /// Candidate degrees of freedom for the Student-t two-step fit.
    pub nu_grid: Vec<f64>,
    /// Optional explicit starting point; otherwise least-squares starts.
    pub start_override: Option<ParamVector>,
    /// Use the analytic score (default); otherwise finite differences.
    pub use_analytic_score: bool,
}

impl Default for FitConfig {
    fn default() -> Self {
        FitConfig {
            max_iter: 500,
            grad_tol: 1e-6,
            param_tol: 1e-10,
            nu_grid: vec![3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 10.0, 12.0, 15.0, 20.0, 30.0],
            start_override: None,
            use_analytic_score: true,
        }
    }
}

/// Information criteria at the fitted likelihood.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct InfoCriteria {
    pub aic: f64,
    pub bic: f64,
    pub caic: f64,
    pub hqic: f64,
}

/// AIC/BIC/CAIC/HQIC with the effective sample size n_eff = n - m.
pub fn information_criteria(loglik: f64, dim: usize, n_eff: usize) -> Result<InfoCriteria> {
    if n_eff <= dim {
        return Err(Error::DegenerateSample { n_eff, dim });
    }
    let d = dim as f64;
    let ln_n = (n_eff as f64).ln();
    Ok(InfoCriteria {
        aic: -2.0 * loglik + 2.0 * d,
        bic: -2.0 * loglik + d * ln_n,
        caic: -2.0 * loglik + d * (ln_n + 1.0),
        hqic: -2.0 * loglik + 2.0 * d * ln_n.ln(),
    })
}

/// A completed conditional maximum-likelihood fit.
#[derive(Debug, Clone, Serialize)]
pub struct FitResult {
    pub spec: ModelSpec,
    pub params: ParamVector,
    /// Observed-information standard errors; `None` when the negative
    /// Hessian could not be inverted.
    pub std_errors: Option<Vec<f64>>,
    pub z_values: Option<Vec<f64>>,
    pub p_values: Option<Vec<f64>>,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub caic: f64,
    pub hqic: f64,
    pub n_eff: usize,
    pub converged: bool,
    pub iterations: usize,
    /// Degrees of freedom chosen by the two-step grid fit, when applicable.
    pub selected_nu: Option<f64>,
    /// Moduli of the autoregressive polynomial roots; values above one mean
    /// the fitted dynamics are non-explosive.
    pub ar_root_moduli: Vec<f64>,
    pub residual_state: RecursionState,
}

impl FitResult {
    /// Flat key/value rendering of the fit (TOML syntax, arrays included).
    pub fn to_key_value_text(&self) -> String {
        toml::to_string_pretty(self).unwrap_or_else(|e| format!("serialization_error = \"{e}\""))
    }
}

/// Least-squares starting values: OLS of g(y) on the covariates, then a
/// Hannan-Rissanen step for the ARMA part (long-AR residuals standing in as
/// lagged innovations), and the residual standard deviation for sigma.
pub fn initial_values(spec: &ModelSpec, data: &BoundedSeries) -> Result<ParamVector> {
    let n = data.len();
    let min_len = spec.m() + spec.k + spec.p + spec.q;
    if n <= min_len {
        return Err(Error::InsufficientData { min: min_len, len: n });
    }

    let gy: Vec<f64> = data
        .y()
        .iter()
        .map(|&y| spec.link.g_unchecked(y))
        .collect();

    // Stage 1: regression of g(y) on an intercept and the covariates.
    let k = spec.k;
    let mut design = DMatrix::zeros(n, 1 + k);
    for t in 0..n {
        design[(t, 0)] = 1.0;
        for l in 0..k {
            design[(t, 1 + l)] = data.covariate_row(t)[l];
        }
    }
    let coef = ols(design, DVector::from_column_slice(&gy))?;
    let alpha0 = coef[0];
    let beta0: Vec<f64> = (0..k).map(|l| coef[1 + l]).collect();
    let resid: Vec<f64> = (0..n)
        .map(|t| {
            let mut fit = alpha0;
            for l in 0..k {
                fit += beta0[l] * data.covariate_row(t)[l];
            }
            gy[t] - fit
        })
        .collect();

    let (p, q) = (spec.p, spec.q);
    if p + q == 0 {
        let sigma0 = sane_sigma(std_dev(&resid));
        return ParamVector::new(alpha0, beta0, vec![], vec![], sigma0);
    }

    // Stage 2: ARMA starting values from the residual series.
    let (phi0, theta0, sigma0) = if q == 0 {
        let ar = lagged_regression(&resid, p, None)?;
        let sigma = sane_sigma(std_dev(&ar.resid[ar.start..]));
        (ar.coefs, vec![], sigma)
    } else {
        let long_order = (p + q + 4).min(n / 4).max(spec.m() + 1);
        let long_ar = lagged_regression(&resid, long_order, None)?;
        let hr = lagged_regression(&resid, p, Some((&long_ar.resid, q, long_ar.start)))?;
        let sigma = sane_sigma(std_dev(&hr.resid[hr.start..]));
        (hr.coefs[..p].to_vec(), hr.coefs[p..].to_vec(), sigma)
    };

    // The stage-1 intercept estimates the stationary level of g(y); in the
    // recursion the intercept is that level scaled by 1 - sum(phi).
    let alpha_scaled = alpha0 * (1.0 - phi0.iter().sum::<f64>());

    ParamVector::new(alpha_scaled, beta0, phi0, theta0, sigma0)
}

struct LagFit {
    coefs: Vec<f64>,
    /// Full-length residual series, zero before `start`.
    resid: Vec<f64>,
    start: usize,
}

/// Regresses e_t on its own first `ar_lags` lags and, optionally, on the
/// first `q` lags of an innovation proxy series (valid from `innov_start`).
fn lagged_regression(
    e: &[f64],
    ar_lags: usize,
    innovations: Option<(&[f64], usize, usize)>,
) -> Result<LagFit> {
    let n = e.len();
    let (innov, q, innov_start) = match innovations {
        Some((s, q, st)) => (s, q, st),
        None => (&[][..], 0, 0),
    };
    let t0 = ar_lags.max(if q > 0 { innov_start + q } else { 0 });
    let cols = ar_lags + q;
    if n <= t0 + cols {
        return Err(Error::InsufficientData { min: t0 + cols, len: n });
    }
    let rows = n - t0;
    let mut x = DMatrix::zeros(rows, cols);
    let mut target = DVector::zeros(rows);
    for (r, t) in (t0..n).enumerate() {
        for i in 0..ar_lags {
            x[(r, i)] = e[t - i - 1];
        }
        for j in 0..q {
            x[(r, ar_lags + j)] = innov[t - j - 1];
        }
        target[r] = e[t];
    }
    let coefs = ols(x, target)?;
    let mut resid = vec![0.0; n];
    for t in t0..n {
        let mut fitted = 0.0;
        for i in 0..ar_lags {
            fitted += coefs[i] * e[t - i - 1];
        }
        for j in 0..q {
            fitted += coefs[ar_lags + j] * innov[t - j - 1];
        }
        resid[t] = e[t] - fitted;
    }
    Ok(LagFit { coefs: coefs.as_slice().to_vec(), resid, start: t0 })
}

fn std_dev(v: &[f64]) -> f64 {
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0).max(1.0)).sqrt()
}

fn sane_sigma(s: f64) -> f64 {
    if s.is_finite() && s > 1e-8 {
        s
    } else {
        1e-4
    }
}

/// OLS with an explicit rank check through the singular values.
fn ols(x: DMatrix<f64>, y: DVector<f64>) -> Result<DVector<f64>> {
    let cols = x.ncols();
    let svd = x.svd(true, true);
    let max_sv = svd.singular_values.iter().fold(0.0_f64, |a, &s| a.max(s));
    let eps = max_sv * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > eps).count();
    if rank < cols {
        return Err(Error::SingularDesign { rank, cols });
    }
    svd.solve(&y, eps)
        .map(|m| DVector::from_column_slice(m.as_slice()))
        .map_err(|e| Error::Input(e.to_string()))
}

pub fn fit(spec: &ModelSpec, data: &BoundedSeries, config: &FitConfig) -> Result<FitResult> {
    let start = match &config.start_override {
        Some(s) => s.clone(),
        None => initial_values(spec, data)?,
    };
    let d = spec.dim();
    let x0 = to_transformed(&start);

    let objective = |x: &[f64]| -> f64 {
        match from_transformed(spec, x) {
            Ok(p) => match log_likelihood(spec, &p, data) {
                Ok(ll) => -ll,
                Err(_) => f64::INFINITY,
            },
            Err(_) => f64::INFINITY,
        }
    };
    if !objective(&x0).is_finite() {
        return Err(Error::Input(
            "starting values give a non-finite log-likelihood".into(),
        ));
    }

    let gradient = |x: &[f64]| -> Vec<f64> {
        let Ok(p) = from_transformed(spec, x) else {
            return vec![f64::NAN; d];
        };
        let mut g = if config.use_analytic_score {
            match score(spec, &p, data) {
                Ok(s) => s,
                Err(_) => return vec![f64::NAN; d],
            }
        } else {
            match fd_gradient(spec, &p, data) {
                Ok(s) => s,
                Err(_) => return vec![f64::NAN; d],
            }
        };
        // Chain rule to the log-sigma coordinate, then negate to minimize.
        g[d - 1] *= p.sigma;
        g.iter_mut().for_each(|v| *v = -*v);
        g
    };

    let opts = BfgsOptions {
        max_iter: config.max_iter,
        grad_tol: config.grad_tol,
        step_tol: config.param_tol,
        ..BfgsOptions::default()
    };
    let mut outcome = optim::minimize(&objective, &gradient, &x0, &opts);
    // Backtracking BFGS can stall with the gradient a decade or two above
    // tolerance once objective differences fall below floating-point
    // resolution; a few Newton steps on the gradient finish the job.
    if !outcome.converged_grad && outcome.grad_norm.is_finite() && outcome.grad_norm < 1e-2 {
        let polished = newton_polish(&objective, &gradient, &outcome.x, opts.grad_tol);
        if polished.grad_norm < outcome.grad_norm {
            outcome.x = polished.x;
            outcome.grad_norm = polished.grad_norm;
            outcome.converged_grad = polished.grad_norm <= opts.grad_tol;
            outcome.iterations += polished.steps;
        }
    }
    let params = from_transformed(spec, &outcome.x)?;
    let loglik = log_likelihood(spec, &params, data)?;
    let residual_state = run_recursion(spec, &params, data)?;
    let n_eff = data.len() - spec.m();
    let ic = information_criteria(loglik, d, n_eff)?;

    // Observed information in the original parameterization.
    let std_errors = match model::hessian(spec, &params, data) {
        Ok(h) => invert_neg_hessian(&h),
        Err(_) => None,
    };
    let estimates = params.to_vec();
    let z_values = std_errors
        .as_ref()
        .map(|se| estimates.iter().zip(se).map(|(e, s)| e / s).collect::<Vec<_>>());
    let p_values = z_values.as_ref().map(|zs| {
        zs.iter()
            .map(|z| 2.0 * (1.0 - math::norm_cdf(z.abs())))
            .collect::<Vec<_>>()
    });

    Ok(FitResult {
        spec: *spec,
        ar_root_moduli: ar_root_moduli(&params.phi),
        params,
        std_errors,
        z_values,
        p_values,
        loglik,
        aic: ic.aic,
        bic: ic.bic,
        caic: ic.caic,
        hqic: ic.hqic,
        n_eff,
        converged: outcome.converged_grad,
        iterations: outcome.iterations,
        selected_nu: None,
        residual_state,
    })
}

/// Two-step Student-t fit: every candidate degrees-of-freedom value is fit
/// with the remaining parameters free, and the grid point with the highest
/// log-likelihood wins.
pub fn fit_student_t(spec: &ModelSpec, data: &BoundedSeries, config: &FitConfig) -> Result<FitResult> {
    if !matches!(spec.kernel, SymmetricKernel::StudentT { .. }) {
        return Err(Error::Domain(
            "two-step degrees-of-freedom fit requires a Student-t kernel".into(),
        ));
    }
    if config.nu_grid.is_empty() {
        return Err(Error::Domain("degrees-of-freedom grid is empty".into()));
    }

    let fits: Vec<(f64, Result<FitResult>)> = config
        .nu_grid
        .par_iter()
        .map(|&nu| {
            let result = SymmetricKernel::student_t(nu).and_then(|kernel| {
                let candidate = ModelSpec { kernel, ..*spec };
                fit(&candidate, data, config)
            });
            (nu, result)
        })
        .collect();

    let mut best: Option<(f64, FitResult)> = None;
    let mut failures = Vec::new();
    for (nu, outcome) in fits {
        match outcome {
            Ok(r) => {
                if best.as_ref().map_or(true, |(_, b)| r.loglik > b.loglik) {
                    best = Some((nu, r));
                }
            }
            Err(e) => failures.push((nu, e.to_string())),
        }
    }
    match best {
        Some((nu, mut r)) => {
            r.selected_nu = Some(nu);
            Ok(r)
        }
        None => Err(Error::NuGridFailed { outcomes: failures }),
    }
}

/// One fit per quantile level, reported with its information criteria.
#[derive(Debug, Clone, Serialize)]
pub struct TauSweepRow {
    pub tau: f64,
    pub loglik: f64,
    pub aic: f64,
    pub bic: f64,
    pub caic: f64,
    pub hqic: f64,
    pub converged: bool,
}

pub fn fit_tau_grid(
    spec: &ModelSpec,
    data: &BoundedSeries,
    config: &FitConfig,
    taus: &[f64],
) -> Result<Vec<TauSweepRow>> {
    taus.par_iter()
        .map(|&tau| {
            let sweep_spec = ModelSpec { tau, ..*spec };
            if !(tau > 0.0 && tau < 1.0) {
                return Err(Error::Domain(format!("tau grid value {tau} outside (0,1)")));
            }
            let r = fit(&sweep_spec, data, config)?;
            Ok(TauSweepRow {
                tau,
                loglik: r.loglik,
                aic: r.aic,
                bic: r.bic,
                caic: r.caic,
                hqic: r.hqic,
                converged: r.converged,
            })
        })
        .collect()
}

struct PolishOutcome {
    x: Vec<f64>,
    grad_norm: f64,
    steps: usize,
}

/// Newton refinement of a near-stationary point: finite-difference Jacobian
/// of the (analytic) gradient, solve, accept while the gradient sup-norm
/// shrinks and the objective stays at the same floating-point level.
fn newton_polish<F, G>(objective: &F, gradient: &G, start: &[f64], grad_tol: f64) -> PolishOutcome
where
    F: Fn(&[f64]) -> f64,
    G: Fn(&[f64]) -> Vec<f64>,
{
    let d = start.len();
    let mut x = start.to_vec();
    let mut g = gradient(&x);
    let mut f0 = objective(&x);
    let sup = |v: &[f64]| v.iter().fold(0.0_f64, |a, t| a.max(t.abs()));
    let mut grad_norm = sup(&g);
    let mut steps = 0;

    for _ in 0..4 {
        if grad_norm <= grad_tol {
            break;
        }
        let mut hess = DMatrix::zeros(d, d);
        for i in 0..d {
            let h = f64::EPSILON.cbrt() * x[i].abs().max(1.0);
            let mut plus = x.clone();
            plus[i] += h;
            let mut minus = x.clone();
            minus[i] -= h;
            let gp = gradient(&plus);
            let gm = gradient(&minus);
            for j in 0..d {
                hess[(j, i)] = (gp[j] - gm[j]) / (2.0 * h);
            }
        }
        let sym = (&hess + hess.transpose()) * 0.5;
        let Some(delta) = sym.lu().solve(&DVector::from_column_slice(&g)) else {
            break;
        };
        let x_new: Vec<f64> = x.iter().zip(delta.iter()).map(|(xi, di)| xi - di).collect();
        let g_new = gradient(&x_new);
        let f_new = objective(&x_new);
        let grad_new = sup(&g_new);
        let same_level = f_new.is_finite() && f_new <= f0 + 1e-10 * f0.abs().max(1.0);
        if !(grad_new.is_finite() && grad_new < grad_norm && same_level) {
            break;
        }
        steps += 1;
        x = x_new;
        g = g_new;
        f0 = f_new;
        grad_norm = grad_new;
    }

    PolishOutcome { x, grad_norm, steps }
}

fn to_transformed(p: &ParamVector) -> Vec<f64> {
    let mut v = p.to_vec();
    let last = v.len() - 1;
    v[last] = v[last].ln();
    v
}

fn from_transformed(spec: &ModelSpec, x: &[f64]) -> Result<ParamVector> {
    let mut v = x.to_vec();
    let last = v.len() - 1;
    v[last] = v[last].exp();
    ParamVector::from_vec(spec, &v)
}

fn fd_gradient(spec: &ModelSpec, params: &ParamVector, data: &BoundedSeries) -> Result<Vec<f64>> {
    let theta0 = params.to_vec();
    let d = theta0.len();
    let mut g = vec![0.0; d];
    for i in 0..d {
        let mut h = f64::EPSILON.cbrt() * theta0[i].abs().max(1.0);
        if i == d - 1 {
            h = h.min(0.5 * theta0[i]);
        }
        let mut plus = theta0.clone();
        plus[i] += h;
        let mut minus = theta0.clone();
        minus[i] -= h;
        let lp = log_likelihood(spec, &ParamVector::from_vec(spec, &plus)?, data)?;
        let lm = log_likelihood(spec, &ParamVector::from_vec(spec, &minus)?, data)?;
        g[i] = (lp - lm) / (2.0 * h);
    }
    Ok(g)
}

fn invert_neg_hessian(h: &DMatrix<f64>) -> Option<Vec<f64>> {
    let neg = -h.clone();
    let inv = neg.try_inverse()?;
    let mut se = Vec::with_capacity(inv.nrows());
    for i in 0..inv.nrows() {
        let v = inv[(i, i)];
        if !(v.is_finite() && v > 0.0) {
            return None;
        }
        se.push(v.sqrt());
    }
    Some(se)
}

/// Moduli of the roots of 1 - phi_1 z - ... - phi_p z^p, from the companion
/// matrix; an empty vector when there is no autoregressive part.
fn ar_root_moduli(phi: &[f64]) -> Vec<f64> {
    let p_eff = phi.iter().rposition(|&v| v != 0.0).map_or(0, |i| i + 1);
    if p_eff == 0 {
        return Vec::new();
    }
    if p_eff == 1 {
        return vec![(1.0 / phi[0]).abs()];
    }
    let lead = phi[p_eff - 1];
    // Monic form z^p + c_{p-1} z^{p-1} + ... + c_0 with c_0 = -1/phi_p,
    // c_j = phi_{p-j}/phi_p.
    let mut companion = DMatrix::zeros(p_eff, p_eff);
    for i in 1..p_eff {
        companion[(i, i - 1)] = 1.0;
    }
    companion[(0, p_eff - 1)] = 1.0 / lead;
    for j in 1..p_eff {
        companion[(j, p_eff - 1)] = -phi[p_eff - 1 - j] / lead;
    }
    let mut mods: Vec<f64> = companion
        .complex_eigenvalues()
        .iter()
        .map(|c| c.norm())
        .collect();
    mods.sort_by(|a, b| a.partial_cmp(b).unwrap());
    mods
}
