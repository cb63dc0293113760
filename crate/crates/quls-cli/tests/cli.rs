//! End-to-end tests of the `quls` binary: artifacts on disk, exit codes,
//! determinism of reruns, and machine-parseable error lines.

use std::path::Path;
use std::process::{Command, Output};

fn quls(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_quls"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

#[test]
fn fit_bundled_dataset_writes_estimate_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fit");
    let result = quls(&[
        "fit",
        "--model",
        "arma:2,0",
        "--harmonics",
        "12",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let table = read(&out.join("estimates.csv"));
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], "parameter,estimate,std_error,z_value,p_value");
    assert_eq!(lines.len(), 7); // header + alpha, beta1, beta2, phi1, phi2, sigma
    assert!(lines.iter().any(|l| l.starts_with("sigma,0.16")));
    let toml_text = read(&out.join("fit.toml"));
    assert!(toml_text.contains("loglik"));
    assert!(toml_text.contains("converged = true"));
}

#[test]
fn outputs_are_byte_identical_across_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let result = quls(&[
            "simulate",
            "--scenario",
            "s1",
            "--n",
            "150",
            "--seed",
            "42",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    assert_eq!(read(&a.join("series.csv")), read(&b.join("series.csv")));

    for out in [&a, &b] {
        let result = quls(&[
            "fit",
            "--model",
            "arma:1,0",
            "--harmonics",
            "12",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(result.status.success());
    }
    assert_eq!(read(&a.join("estimates.csv")), read(&b.join("estimates.csv")));
    assert_eq!(read(&a.join("fit.toml")), read(&b.join("fit.toml")));
}

#[test]
fn fit_recovers_simulated_scenario_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let sim_out = dir.path().join("sim");
    let result = quls(&[
        "simulate",
        "--scenario",
        "s1",
        "--n",
        "400",
        "--seed",
        "7",
        "--out",
        sim_out.to_str().unwrap(),
    ]);
    assert!(result.status.success());

    let fit_out = dir.path().join("fit");
    let result = quls(&[
        "fit",
        "--input",
        sim_out.join("series.csv").to_str().unwrap(),
        "--model",
        "arma:2,0",
        "--out",
        fit_out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let table = read(&fit_out.join("estimates.csv"));
    let value = |name: &str| -> f64 {
        table
            .lines()
            .find(|l| l.starts_with(name))
            .unwrap()
            .split(',')
            .nth(1)
            .unwrap()
            .parse()
            .unwrap()
    };
    // Loose recovery bands around the S1 truth.
    assert!((value("phi1") - 1.2).abs() < 0.25, "phi1 {}", value("phi1"));
    assert!((value("phi2") + 0.3).abs() < 0.25, "phi2 {}", value("phi2"));
    assert!((value("beta1") - 0.5).abs() < 0.2, "beta1 {}", value("beta1"));
    assert!((value("sigma") - 0.1).abs() < 0.05, "sigma {}", value("sigma"));
}

#[test]
fn mc_stub_estimator_reports_zero_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("mc");
    let result = quls(&[
        "mc",
        "--scenario",
        "s2",
        "--n",
        "75",
        "--reps",
        "8",
        "--seed",
        "3",
        "--estimator",
        "stub",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    for file in ["mc_rb.csv", "mc_arb.csv", "mc_rmse.csv"] {
        let table = read(&out.join(file));
        for line in table.lines().skip(1) {
            let v: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
            assert_eq!(v, 0.0, "{file}: {line}");
        }
    }
    let runs = read(&out.join("mc_runs.csv"));
    assert!(runs.contains("S2,75,8,0"));
}

#[test]
fn forecast_writes_holdout_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fc");
    let result = quls(&[
        "forecast",
        "--model",
        "arma:2,0",
        "--harmonics",
        "12",
        "--holdout",
        "6",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let table = read(&out.join("forecast.csv"));
    assert_eq!(table.lines().count(), 7); // header + 6 horizons
    let errors = read(&out.join("forecast_errors.csv"));
    assert!(errors.lines().last().unwrap().starts_with("overall,"));
    // Forecasts stay inside the open interval.
    for line in table.lines().skip(1) {
        let v: f64 = line.split(',').nth(1).unwrap().parse().unwrap();
        assert!(v > 0.0 && v < 1.0);
    }
}

#[test]
fn diagnose_emits_residuals_and_svg() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("diag");
    let result = quls(&[
        "diagnose",
        "--model",
        "arma:2,0",
        "--harmonics",
        "12",
        "--svg",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success());
    let residuals = read(&out.join("residuals.csv"));
    assert_eq!(residuals.lines().count(), 221); // header + 220 retained points
    assert!(residuals.lines().nth(1).unwrap().contains("2000-07"));
    for file in ["qq_gcs.csv", "qq_rq.csv"] {
        assert_eq!(read(&out.join(file)).lines().count(), 221);
    }
    let svg = read(&out.join("qq_rq.svg"));
    assert!(svg.starts_with("<svg"));
    assert!(svg.contains("circle"));
}

#[test]
fn tau_sweep_writes_summary_in_indicator_layout() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let result = quls(&[
        "tau-sweep",
        "--model",
        "arma:1,1",
        "--kernel",
        "t",
        "--nu",
        "3",
        "--harmonics",
        "12",
        "--tau-grid",
        "0.25,0.5,0.75",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let sweep = read(&out.join("tau_sweep.csv"));
    assert_eq!(sweep.lines().count(), 4);
    let summary = read(&out.join("tau_sweep_summary.csv"));
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "indicator,value");
    assert!(lines[1].starts_with("loglik,"));
    assert!(lines[5].starts_with("hqic,"));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(
        &cfg,
        "model = \"arma:1,0\"\nharmonics = 12\ntau = 0.25\n",
    )
    .unwrap();
    let out = dir.path().join("fit");
    let result = quls(&[
        "fit",
        "--config",
        cfg.to_str().unwrap(),
        "--tau",
        "0.75",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));
    let toml_text = read(&out.join("fit.toml"));
    assert!(toml_text.contains("tau = 0.75"), "config tau not overridden");
}

#[test]
fn error_paths_exit_nonzero_with_single_line_reason() {
    let dir = tempfile::tempdir().unwrap();

    // Out-of-range value names the row.
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "date,value\n2020-01,0.5\n2020-02,1.0\n").unwrap();
    let out_dir = dir.path().join("never");
    let result = quls(&[
        "fit",
        "--input",
        bad.to_str().unwrap(),
        "--out",
        out_dir.to_str().unwrap(),
    ]);
    assert!(!result.status.success());
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert_eq!(stderr.lines().count(), 1, "stderr: {stderr}");
    assert!(stderr.starts_with("error: "));
    assert!(stderr.contains("row 3"));
    assert!(!out_dir.exists(), "failed run must leave no artifacts");

    // Header-only file.
    let empty = dir.path().join("empty.csv");
    std::fs::write(&empty, "date,value\n").unwrap();
    let result = quls(&["fit", "--input", empty.to_str().unwrap()]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("no data rows"));

    // Missing value column.
    let no_value = dir.path().join("noval.csv");
    std::fs::write(&no_value, "date,level\n2020-01,0.5\n").unwrap();
    let result = quls(&["fit", "--input", no_value.to_str().unwrap()]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("no 'value' column"));

    // Unknown scenario.
    let result = quls(&["simulate", "--scenario", "s9"]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("unknown scenario"));
}

#[test]
fn partially_empty_covariate_column_is_rejected_but_fully_empty_is_dropped() {
    let dir = tempfile::tempdir().unwrap();

    // Fully empty crisis column: accepted, treated as absent.
    let ok = dir.path().join("ok.csv");
    let mut text = String::from("date,value,crisis\n");
    for i in 0..40 {
        text.push_str(&format!("2020-{:02},0.{}1,\n", (i % 12) + 1, (i % 8) + 1));
    }
    std::fs::write(&ok, &text).unwrap();
    let out = dir.path().join("ok-out");
    let result = quls(&[
        "fit",
        "--input",
        ok.to_str().unwrap(),
        "--model",
        "arma:1,0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(result.status.success(), "{}", String::from_utf8_lossy(&result.stderr));

    // Partially filled covariate: rejected.
    let partial = dir.path().join("partial.csv");
    std::fs::write(
        &partial,
        "date,value,crisis\n2020-01,0.5,\n2020-02,0.4,1\n2020-03,0.45,\n",
    )
    .unwrap();
    let result = quls(&["fit", "--input", partial.to_str().unwrap()]);
    assert!(!result.status.success());
    assert!(String::from_utf8_lossy(&result.stderr).contains("partially empty"));
}
