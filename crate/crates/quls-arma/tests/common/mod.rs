//! Shared helpers for the integration and acceptance suites. Everything
//! here is an independent oracle: it never calls back into the code paths
//! it is used to check.

use quls_arma::model::BoundedSeries;
use quls_arma::simulate::harmonic_covariates;

/// Adaptive Simpson quadrature with interval-halving error control.
pub fn adaptive_simpson<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64) -> f64 {
    fn simpson<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        ((b - a) / 6.0 * (fa + 4.0 * fm + fb), m, fm)
    }
    fn recurse<F: Fn(f64) -> f64>(
        f: &F,
        a: f64,
        fa: f64,
        b: f64,
        fb: f64,
        whole: f64,
        m: f64,
        fm: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let (left, lm, flm) = simpson(f, a, fa, m, fm);
        let (right, rm, frm) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            left + right + delta / 15.0
        } else {
            recurse(f, a, fa, m, fm, left, lm, flm, 0.5 * tol, depth - 1)
                + recurse(f, m, fm, b, fb, right, rm, frm, 0.5 * tol, depth - 1)
        }
    }
    let fa = f(a);
    let fb = f(b);
    let (whole, m, fm) = simpson(f, a, fa, b, fb);
    recurse(f, a, fa, b, fb, whole, m, fm, tol, 48)
}

/// The bundled stored-energy series with the two harmonic covariate columns
/// (period 12) attached.
pub fn stored_energy_with_harmonics() -> BoundedSeries {
    let raw = quls_arma::dataset::stored_energy();
    let x: Vec<f64> = harmonic_covariates(raw.len(), 12)
        .iter()
        .flatten()
        .copied()
        .collect();
    BoundedSeries::new(
        raw.y().to_vec(),
        x,
        2,
        raw.labels().map(|l| l.to_vec()),
    )
    .unwrap()
}

/// Sample mean.
pub fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Sample variance (n-1 denominator).
pub fn variance(v: &[f64]) -> f64 {
    let m = mean(v);
    v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() as f64 - 1.0)
}
