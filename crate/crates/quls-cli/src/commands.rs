//! The six subcommands: fit, simulate, forecast, mc, diagnose, tau-sweep.

use std::fmt::Write as _;

use quls_arma::diagnostics::{qq_data, residuals, QqReference};
use quls_arma::estimate::{fit, fit_student_t, fit_tau_grid, FitConfig, FitResult};
use quls_arma::forecast::{forecast, forecast_errors};
use quls_arma::model::{BoundedSeries, ModelSpec};
use quls_arma::simulate::{run_monte_carlo, run_monte_carlo_with, McReport, ScenarioConfig};

use crate::config::Flags;
use crate::data::{bundled, future_harmonics, load_series, with_harmonics, LoadedSeries};
use crate::output::{est, ll, prop, with_cleanup};
use crate::svg;
use crate::CliError;

fn load_input(flags: &Flags) -> Result<LoadedSeries, CliError> {
    let loaded = match &flags.input {
        Some(path) => load_series(path)?,
        None => bundled(),
    };
    match flags.harmonics {
        Some(period) => with_harmonics(loaded, period),
        None => Ok(loaded),
    }
}

fn build_spec(flags: &Flags, k: usize) -> Result<(ModelSpec, Option<Vec<f64>>), CliError> {
    let (p, q) = flags.model_orders()?;
    let (kernel, grid) = flags.kernel_choice()?;
    let link = flags.link_choice()?;
    let tau = flags.tau_value();
    let spec = ModelSpec::new(p, q, k, link, kernel, tau).map_err(|e| CliError(e.to_string()))?;
    Ok((spec, grid))
}

fn fit_config(grid: &Option<Vec<f64>>) -> FitConfig {
    let mut config = FitConfig::default();
    if let Some(g) = grid {
        config.nu_grid = g.clone();
    }
    config
}

fn run_fit(
    spec: &ModelSpec,
    grid: &Option<Vec<f64>>,
    data: &BoundedSeries,
) -> Result<FitResult, CliError> {
    let config = fit_config(grid);
    let result = if grid.is_some() {
        fit_student_t(spec, data, &config)
    } else {
        fit(spec, data, &config)
    };
    result.map_err(|e| CliError(e.to_string()))
}

fn estimates_table(result: &FitResult) -> String {
    let mut text = String::from("parameter,estimate,std_error,z_value,p_value\n");
    let names = result.spec.param_names();
    let estimates = result.params.to_vec();
    for (i, name) in names.iter().enumerate() {
        let (se, z, p) = match (&result.std_errors, &result.z_values, &result.p_values) {
            (Some(se), Some(z), Some(p)) => (est(se[i]), est(z[i]), est(p[i])),
            _ => ("NA".into(), "NA".into(), "NA".into()),
        };
        let _ = writeln!(text, "{name},{},{se},{z},{p}", est(estimates[i]));
    }
    text
}

pub fn cmd_fit(flags: &Flags) -> Result<(), CliError> {
    let loaded = load_input(flags)?;
    let (spec, grid) = build_spec(flags, loaded.series.k())?;
    with_cleanup(&flags.out_dir(), |out| {
        let result = run_fit(&spec, &grid, &loaded.series)?;
        announce_fit(&result);
        out.write("estimates.csv", &estimates_table(&result))?;
        out.write("fit.toml", &result.to_key_value_text())?;
        Ok(())
    })
}

fn announce_fit(result: &FitResult) {
    let nu = result
        .selected_nu
        .map(|v| format!(", selected nu {v}"))
        .unwrap_or_default();
    println!(
        "fit: loglik {} aic {} bic {} (converged: {}, iterations {}{nu})",
        ll(result.loglik),
        ll(result.aic),
        ll(result.bic),
        result.converged,
        result.iterations
    );
}

fn scenario_from(flags: &Flags, n: usize) -> Result<ScenarioConfig, CliError> {
    let name = flags.scenario.as_deref().unwrap_or("s1");
    let tau = flags.tau_value();
    let seed = flags.seed.unwrap_or(1);
    let mut cfg = match name.to_ascii_lowercase().as_str() {
        "s1" => ScenarioConfig::s1(tau, n, seed),
        "s2" => ScenarioConfig::s2(tau, n, seed),
        "s3" => ScenarioConfig::s3(tau, n, seed),
        "s4" => ScenarioConfig::s4(tau, n, seed),
        other => return Err(CliError(format!("unknown scenario '{other}'"))),
    }
    .map_err(|e| CliError(e.to_string()))?;
    if let Some(b) = flags.burn_in {
        if b < cfg.spec.m() {
            return Err(CliError(format!(
                "burn-in {b} below the initialization length {}",
                cfg.spec.m()
            )));
        }
        cfg.burn_in = b;
    }
    Ok(cfg)
}

pub fn cmd_simulate(flags: &Flags) -> Result<(), CliError> {
    let n_list = flags.n_list()?;
    if n_list.len() != 1 {
        return Err(CliError("simulate expects a single sample size".into()));
    }
    let cfg = scenario_from(flags, n_list[0])?;
    with_cleanup(&flags.out_dir(), |out| {
        let series = quls_arma::simulate::generate_series(&cfg)
            .map_err(|e| CliError(e.to_string()))?;
        let mut text = String::from("t,value,cos,sin\n");
        for t in 0..series.len() {
            let row = series.covariate_row(t);
            let _ = writeln!(
                text,
                "{},{},{},{}",
                t + 1,
                prop(series.y()[t]),
                prop(row[0]),
                prop(row[1])
            );
        }
        out.write("series.csv", &text)?;
        println!(
            "simulated scenario {} (tau {}, n {}, seed {})",
            cfg.name, cfg.spec.tau, cfg.n, cfg.seed
        );
        Ok(())
    })
}

pub fn cmd_forecast(flags: &Flags) -> Result<(), CliError> {
    let loaded = load_input(flags)?;
    let (spec, grid) = build_spec(flags, loaded.series.k())?;
    let holdout = flags.holdout.unwrap_or(10);
    let horizon = flags.horizon.unwrap_or(holdout.max(1));
    let n = loaded.series.len();
    if holdout >= n {
        return Err(CliError(format!("holdout {holdout} leaves no training data (n = {n})")));
    }
    let train_len = n - holdout;
    let train = loaded
        .series
        .prefix(train_len)
        .map_err(|e| CliError(e.to_string()))?;

    // Future covariates: held-out rows first, then the harmonic extension
    // when the design is purely harmonic.
    let k = loaded.series.k();
    let mut future_x = Vec::with_capacity(horizon * k);
    for j in 0..horizon {
        let idx = train_len + j;
        if idx < n {
            future_x.extend_from_slice(loaded.series.covariate_row(idx));
        } else if k == 0 {
            // nothing to extend
        } else if flags.harmonics.is_some() && k == 2 {
            let rows = future_harmonics(n, horizon, flags.harmonics.unwrap());
            let row = rows[idx - n];
            future_x.extend_from_slice(&row);
        } else {
            return Err(CliError(
                "forecasting past the sample needs future covariates; only harmonic \
                 designs extend automatically"
                    .into(),
            ));
        }
    }

    with_cleanup(&flags.out_dir(), |out| {
        let result = run_fit(&spec, &grid, &train)?;
        announce_fit(&result);
        let fc = forecast(
            &result.spec,
            &result.params,
            &train,
            horizon,
            if k == 0 { None } else { Some(&future_x) },
        )
        .map_err(|e| CliError(e.to_string()))?;

        let mut table = String::from("h,forecast,actual,error\n");
        let mut errors = String::from("h,mse,mape\n");
        let mut compared_actual = Vec::new();
        let mut compared_pred = Vec::new();
        for j in 0..horizon {
            let idx = train_len + j;
            if idx < n {
                let actual = loaded.series.y()[idx];
                let _ = writeln!(
                    table,
                    "{},{},{},{}",
                    j + 1,
                    prop(fc.y_hat[j]),
                    prop(actual),
                    prop(actual - fc.y_hat[j])
                );
                let (mse, mape) = forecast_errors(&[actual], &[fc.y_hat[j]])
                    .map_err(|e| CliError(e.to_string()))?;
                let _ = writeln!(errors, "{},{},{}", j + 1, est(mse), est(mape));
                compared_actual.push(actual);
                compared_pred.push(fc.y_hat[j]);
            } else {
                let _ = writeln!(table, "{},{},,", j + 1, prop(fc.y_hat[j]));
            }
        }
        if !compared_actual.is_empty() {
            let (mse, mape) = forecast_errors(&compared_actual, &compared_pred)
                .map_err(|e| CliError(e.to_string()))?;
            let _ = writeln!(errors, "overall,{},{}", est(mse), est(mape));
            println!(
                "holdout evaluation over {} points: mse {} mape {}",
                compared_actual.len(),
                est(mse),
                est(mape)
            );
        }
        out.write("forecast.csv", &table)?;
        out.write("forecast_errors.csv", &errors)?;
        Ok(())
    })
}

pub fn cmd_mc(flags: &Flags) -> Result<(), CliError> {
    let n_list = flags.n_list()?;
    let reps = flags.reps.unwrap_or(1000);
    let estimator = flags.estimator.as_deref().unwrap_or("cml");
    with_cleanup(&flags.out_dir(), |out| {
        let mut reports: Vec<McReport> = Vec::new();
        for &n in &n_list {
            let cfg = scenario_from(flags, n)?;
            let report = match estimator {
                "cml" => run_monte_carlo(&cfg, reps, &FitConfig::default()),
                "stub" => {
                    let truth = cfg.true_params.clone();
                    run_monte_carlo_with(&cfg, reps, move |_, _| Ok(truth.clone()))
                }
                other => return Err(CliError(format!("unknown estimator '{other}'"))),
            }
            .map_err(|e| CliError(e.to_string()))?;
            println!(
                "scenario {} n {}: {} replications used, {} failures",
                report.scenario, n, report.replications_used, report.failures
            );
            reports.push(report);
        }

        let param_names: Vec<String> =
            reports[0].summaries.iter().map(|s| s.name.clone()).collect();
        let header = {
            let mut h = String::from("scenario,parameter");
            for n in &n_list {
                let _ = write!(h, ",n{n}");
            }
            h.push('\n');
            h
        };
        for (file, pick) in [
            ("mc_rb.csv", 0usize),
            ("mc_arb.csv", 1),
            ("mc_rmse.csv", 2),
        ] {
            let mut text = header.clone();
            for (row, name) in param_names.iter().enumerate() {
                let _ = write!(text, "{},{name}", reports[0].scenario);
                for report in &reports {
                    let s = &report.summaries[row];
                    let v = match pick {
                        0 => s.rb,
                        1 => s.arb,
                        _ => s.rmse,
                    };
                    let _ = write!(text, ",{}", est(v));
                }
                text.push('\n');
            }
            out.write(file, &text)?;
        }
        let mut runs = String::from("scenario,n,replications_used,failures\n");
        for report in &reports {
            let _ = writeln!(
                runs,
                "{},{},{},{}",
                report.scenario, report.n, report.replications_used, report.failures
            );
        }
        out.write("mc_runs.csv", &runs)?;
        Ok(())
    })
}

pub fn cmd_diagnose(flags: &Flags) -> Result<(), CliError> {
    let loaded = load_input(flags)?;
    let (spec, grid) = build_spec(flags, loaded.series.k())?;
    with_cleanup(&flags.out_dir(), |out| {
        let result = run_fit(&spec, &grid, &loaded.series)?;
        announce_fit(&result);
        let res = residuals(&result.spec, &result.params, &loaded.series)
            .map_err(|e| CliError(e.to_string()))?;

        let m = result.spec.m();
        let mut text = String::from("t,label,fitted_cdf,gcs,rq\n");
        for (i, t) in (m..loaded.series.len()).enumerate() {
            let label = loaded
                .series
                .labels()
                .map(|l| l[t].clone())
                .unwrap_or_default();
            let _ = writeln!(
                text,
                "{},{label},{},{},{}",
                t + 1,
                prop(res.fitted_cdf[i]),
                prop(res.gcs[i]),
                prop(res.rq[i])
            );
        }
        out.write("residuals.csv", &text)?;

        for (file, values, reference, title) in [
            ("qq_gcs", &res.gcs, QqReference::Exp1, "Cox-Snell residuals vs Exp(1)"),
            ("qq_rq", &res.rq, QqReference::StdNormal, "quantile residuals vs N(0,1)"),
        ] {
            let pairs = qq_data(values, reference).map_err(|e| CliError(e.to_string()))?;
            let mut text = String::from("theoretical,empirical\n");
            for (t, e) in &pairs {
                let _ = writeln!(text, "{},{}", prop(*t), prop(*e));
            }
            out.write(&format!("{file}.csv"), &text)?;
            if flags.svg {
                out.write(&format!("{file}.svg"), &svg::qq_panel(title, &pairs))?;
            }
        }
        Ok(())
    })
}

pub fn cmd_tau_sweep(flags: &Flags) -> Result<(), CliError> {
    let loaded = load_input(flags)?;
    let (spec, grid) = build_spec(flags, loaded.series.k())?;
    if grid.is_some() {
        return Err(CliError(
            "tau-sweep uses a fixed kernel; pass --nu rather than --nu-grid".into(),
        ));
    }
    let taus = flags.tau_grid_values()?;
    with_cleanup(&flags.out_dir(), |out| {
        let rows = fit_tau_grid(&spec, &loaded.series, &FitConfig::default(), &taus)
            .map_err(|e| CliError(e.to_string()))?;
        let mut text = String::from("tau,loglik,aic,bic,caic,hqic,converged\n");
        for r in &rows {
            let _ = writeln!(
                text,
                "{},{},{},{},{},{},{}",
                prop(r.tau),
                ll(r.loglik),
                ll(r.aic),
                ll(r.bic),
                ll(r.caic),
                ll(r.hqic),
                r.converged
            );
        }
        out.write("tau_sweep.csv", &text)?;

        let count = rows.len() as f64;
        let avg = |f: fn(&quls_arma::estimate::TauSweepRow) -> f64| {
            rows.iter().map(f).sum::<f64>() / count
        };
        let mut summary = String::from("indicator,value\n");
        let _ = writeln!(summary, "loglik,{}", ll(avg(|r| r.loglik)));
        let _ = writeln!(summary, "aic,{}", ll(avg(|r| r.aic)));
        let _ = writeln!(summary, "bic,{}", ll(avg(|r| r.bic)));
        let _ = writeln!(summary, "caic,{}", ll(avg(|r| r.caic)));
        let _ = writeln!(summary, "hqic,{}", ll(avg(|r| r.hqic)));
        out.write("tau_sweep_summary.csv", &summary)?;
        println!("tau sweep over {} levels: average loglik {}", rows.len(), ll(avg(|r| r.loglik)));
        Ok(())
    })
}
