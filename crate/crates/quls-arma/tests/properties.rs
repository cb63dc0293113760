//! Cross-module invariants and calibration checks that go beyond what the
//! per-module unit tests cover: quadrature normalization, likelihood
//! dominance, degrees-of-freedom selection calibration, and the bundled
//! dataset's holdout forecast sanity.

mod common;

use common::{adaptive_simpson, mean, stored_energy_with_harmonics};
use proptest::prelude::*;
use quls_arma::estimate::{fit, fit_student_t, FitConfig};
use quls_arma::forecast::{forecast, forecast_errors};
use quls_arma::model::{hessian, log_likelihood, ModelSpec, ParamVector};
use quls_arma::simulate::{generate_series, ScenarioConfig, ScenarioName};
use quls_arma::uls::QulsParams;
use quls_arma::{LinkFunction, SymmetricKernel};

/// Kernel densities integrate to one, and agree with their CDFs, over the
/// windows where each statement is numerically meaningful. (For Student-t
/// with 3 degrees of freedom the mass outside [-40, 40] is ~3.4e-5, so the
/// normalization check uses a kernel-appropriate range instead.)
#[test]
fn kernel_quadrature_normalization() {
    let kernels: Vec<(SymmetricKernel, f64)> = vec![
        (SymmetricKernel::Normal, 40.0),
        (SymmetricKernel::student_t(3.0).unwrap(), 2000.0),
        (SymmetricKernel::student_t(5.0).unwrap(), 250.0),
        (SymmetricKernel::student_t(10.0).unwrap(), 90.0),
    ];
    for (kernel, full_range) in kernels {
        let pdf = |z: f64| kernel.pdf(z).unwrap();
        // pdf integrated over [-40, 40] must match the CDF increment.
        let window = adaptive_simpson(&pdf, -40.0, 40.0, 1e-10);
        let cdf_inc = kernel.cdf(40.0).unwrap() - kernel.cdf(-40.0).unwrap();
        assert!(
            (window - cdf_inc).abs() < 1e-8,
            "{kernel:?}: quadrature {window} vs cdf increment {cdf_inc}"
        );
        // Full normalization over a range with negligible tail mass.
        let total = adaptive_simpson(&pdf, -full_range, full_range, 1e-10);
        assert!(
            (total - 1.0).abs() < 1e-8,
            "{kernel:?}: total mass {total}"
        );
    }
}

/// The true parameters dominate a perturbed alternative in likelihood on
/// average across replications.
#[test]
fn likelihood_dominance_at_truth() {
    let mut wins = 0;
    let mut gaps = Vec::new();
    for rep in 0..100u64 {
        let cfg = ScenarioConfig::s1(0.5, 200, 1000 + rep).unwrap();
        let data = generate_series(&cfg).unwrap();
        let mut perturbed = cfg.true_params.clone();
        perturbed.phi[0] += 0.1;
        let l_true = log_likelihood(&cfg.spec, &cfg.true_params, &data).unwrap();
        let l_pert = log_likelihood(&cfg.spec, &perturbed, &data).unwrap();
        if l_true > l_pert {
            wins += 1;
        }
        gaps.push(l_true - l_pert);
    }
    assert!(mean(&gaps) > 0.0, "mean gap {}", mean(&gaps));
    assert!(wins >= 95, "true parameters won only {wins}/100");
}

/// The dynamic fit beats the fitted static (intercept-only) model on the
/// bundled data.
#[test]
fn nested_model_dominance_on_stored_energy() {
    let data = stored_energy_with_harmonics();
    let dynamic_spec =
        ModelSpec::new(2, 0, 2, LinkFunction::Logit, SymmetricKernel::Normal, 0.5).unwrap();
    let dynamic = fit(&dynamic_spec, &data, &FitConfig::default()).unwrap();

    let raw = quls_arma::dataset::stored_energy();
    let null_spec =
        ModelSpec::new(0, 0, 0, LinkFunction::Logit, SymmetricKernel::Normal, 0.5).unwrap();
    let null = fit(&null_spec, &raw, &FitConfig::default()).unwrap();

    assert!(
        dynamic.loglik > null.loglik,
        "dynamic {} vs null {}",
        dynamic.loglik,
        null.loglik
    );
    // The null model has two effective observations fewer; the gap is far
    // larger than that bookkeeping difference.
    assert!(dynamic.loglik - null.loglik > 100.0);
}

/// Two-step selection calibration: data generated with 5 degrees of freedom
/// selects a neighborhood of 5 in at least 60% of replications.
#[test]
fn nu_selection_calibration() {
    let spec = ModelSpec::new(
        2,
        0,
        2,
        LinkFunction::Logit,
        SymmetricKernel::student_t(5.0).unwrap(),
        0.5,
    )
    .unwrap();
    let params =
        ParamVector::new(0.5, vec![0.5, 0.2], vec![1.2, -0.3], vec![], 0.1).unwrap();
    let cfg = ScenarioConfig::new(ScenarioName::Custom, spec, params, 50, 400, 777).unwrap();
    let config = FitConfig::default();
    let reps = 200u64;
    let mut in_neighborhood = 0;
    for rep in 1..=reps {
        let rep_cfg = ScenarioConfig { seed: cfg.seed ^ rep, ..cfg.clone() };
        let data = generate_series(&rep_cfg).unwrap();
        let fitted = fit_student_t(&cfg.spec, &data, &config).unwrap();
        if matches!(fitted.selected_nu, Some(nu) if (4.0..=7.0).contains(&nu)) {
            in_neighborhood += 1;
        }
    }
    let frac = in_neighborhood as f64 / reps as f64;
    assert!(frac >= 0.6, "selected nu in {{4..7}} only {frac:.2} of the time");
}

/// Observed information is negative definite at a converged fit.
#[test]
fn hessian_negative_definite_at_optimum() {
    let cfg = ScenarioConfig::s1(0.5, 400, 4242).unwrap();
    let data = generate_series(&cfg).unwrap();
    let fitted = fit(&cfg.spec, &data, &FitConfig::default()).unwrap();
    assert!(fitted.converged);
    let h = hessian(&cfg.spec, &fitted.params, &data).unwrap();
    let eigen = h.symmetric_eigenvalues();
    for (i, ev) in eigen.iter().enumerate() {
        assert!(*ev < 0.0, "eigenvalue {i} = {ev} not negative");
    }
}

/// Holdout forecasting on the bundled data stays inside loose bands; the
/// evaluation split is a protocol choice, so only order-of-magnitude
/// agreement is meaningful here.
#[test]
fn stored_energy_holdout_forecast_sanity() {
    let data = stored_energy_with_harmonics();
    let h = 10;
    let train = data.prefix(data.len() - h).unwrap();
    let future_x: Vec<f64> = (0..h)
        .flat_map(|j| data.covariate_row(train.len() + j).to_vec())
        .collect();
    let actual = &data.y()[train.len()..];

    let t_spec = ModelSpec::new(
        1,
        1,
        2,
        LinkFunction::Logit,
        SymmetricKernel::student_t(3.0).unwrap(),
        0.5,
    )
    .unwrap();
    let grid: Vec<f64> = (3..=30).map(f64::from).collect();
    let fitted = fit_student_t(&t_spec, &train, &FitConfig { nu_grid: grid, ..FitConfig::default() })
        .unwrap();
    let fc = forecast(&fitted.spec, &fitted.params, &train, h, Some(&future_x)).unwrap();
    for v in &fc.y_hat {
        assert!(*v > 0.0 && *v < 1.0);
    }
    let (mse3, mape3) = forecast_errors(&actual[2..3], &fc.y_hat[2..3]).unwrap();
    assert!(mse3 < 0.01, "three-step MSE {mse3}");
    assert!(mape3 < 25.0, "three-step MAPE {mape3}");
    let (mse_all, mape_all) = forecast_errors(actual, &fc.y_hat).unwrap();
    assert!(mse_all < 0.05, "overall MSE {mse_all}");
    assert!(mape_all < 60.0, "overall MAPE {mape_all}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Link roundtrip over the whole open interval.
    #[test]
    fn link_roundtrip(u in 1e-9f64..=0.999999999, link_idx in 0usize..3) {
        let link = [LinkFunction::Logit, LinkFunction::Probit, LinkFunction::Cloglog][link_idx];
        let back = link.g_inv(link.g(u).unwrap()).unwrap();
        prop_assert!((back - u).abs() < 1e-10);
    }

    /// The reparameterization's defining identity on random parameters.
    #[test]
    fn quls_cdf_at_quantile_is_tau(
        q0 in 0.02f64..=0.98,
        sigma in 0.05f64..=2.0,
        tau in 0.02f64..=0.98,
        t_kernel in proptest::bool::ANY,
    ) {
        let kernel = if t_kernel {
            SymmetricKernel::student_t(3.0).unwrap()
        } else {
            SymmetricKernel::Normal
        };
        let p = QulsParams::new(q0, sigma, tau, kernel).unwrap();
        prop_assert!((p.cdf(q0).unwrap() - tau).abs() < 1e-12);
    }

    /// Kernel quantile inverts the CDF everywhere.
    #[test]
    fn kernel_quantile_inverts_cdf(tau in 1e-6f64..=0.999999, t_kernel in proptest::bool::ANY) {
        let kernel = if t_kernel {
            SymmetricKernel::student_t(4.0).unwrap()
        } else {
            SymmetricKernel::Normal
        };
        let z = kernel.quantile(tau).unwrap();
        prop_assert!((kernel.cdf(z).unwrap() - tau).abs() < 1e-12);
    }
}
