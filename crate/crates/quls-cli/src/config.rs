//! Run configuration: a flat key = value file (TOML syntax) overridden by
//! command-line flags, resolved into concrete settings per subcommand.

use std::path::PathBuf;

use serde::Deserialize;

use crate::CliError;

/// Optional settings as they appear in a config file or on the command
/// line. Every field has the same name in both places.
#[derive(Debug, Clone, Default, clap::Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Flags {
    /// Flat key = value settings file; explicit flags override it.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    /// Input series file (comma-delimited, header row, columns
    /// date?,value,covariate...). Defaults to the bundled stored-energy
    /// dataset.
    #[arg(long)]
    pub input: Option<PathBuf>,

    /// Output directory for result files.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Model orders as arma:P,Q.
    #[arg(long)]
    pub model: Option<String>,

    /// Kernel: normal or t.
    #[arg(long)]
    pub kernel: Option<String>,

    /// Fixed Student-t degrees of freedom (t kernel without a grid).
    #[arg(long)]
    pub nu: Option<f64>,

    /// Degrees-of-freedom grid for the two-step t fit, e.g. 3,4,5,10.
    #[arg(long = "nu-grid")]
    pub nu_grid: Option<String>,

    /// Quantile level in (0,1).
    #[arg(long)]
    pub tau: Option<f64>,

    /// Link: logit, probit or cloglog.
    #[arg(long)]
    pub link: Option<String>,

    /// Add a harmonic covariate pair cos/sin with this period, prepended
    /// to any covariates from the input file.
    #[arg(long)]
    pub harmonics: Option<usize>,

    /// Observations reserved at the end of the sample for forecast
    /// evaluation.
    #[arg(long)]
    pub holdout: Option<usize>,

    /// Forecast horizon (defaults to the holdout length).
    #[arg(long)]
    pub horizon: Option<usize>,

    /// Random seed for simulation and Monte Carlo runs.
    #[arg(long)]
    pub seed: Option<u64>,

    /// Monte Carlo replications.
    #[arg(long)]
    pub reps: Option<usize>,

    /// Burn-in length for simulated series.
    #[arg(long = "burn-in")]
    pub burn_in: Option<usize>,

    /// Sample size (simulate), or comma-separated sizes (mc).
    #[arg(long)]
    pub n: Option<String>,

    /// Simulation scenario: s1, s2, s3 or s4.
    #[arg(long)]
    pub scenario: Option<String>,

    /// Quantile grid as start:step:end or a comma-separated list.
    #[arg(long = "tau-grid")]
    pub tau_grid: Option<String>,

    /// Also render QQ plots as SVG files (diagnose).
    #[arg(long)]
    #[serde(default)]
    pub svg: bool,

    /// Estimator used by the Monte Carlo harness (cml or stub).
    #[arg(long, hide = true)]
    pub estimator: Option<String>,
}

impl Flags {
    /// Loads the config file (when given) and overlays the explicit flags.
    pub fn resolve(self) -> Result<Flags, CliError> {
        let Some(path) = self.config.clone() else {
            return Ok(self);
        };
        let text = std::fs::read_to_string(&path)
            .map_err(|e| CliError(format!("cannot read config {}: {e}", path.display())))?;
        let base: Flags = toml::from_str(&text)
            .map_err(|e| CliError(format!("bad config {}: {e}", path.display())))?;
        Ok(Flags {
            config: None,
            input: self.input.or(base.input),
            out: self.out.or(base.out),
            model: self.model.or(base.model),
            kernel: self.kernel.or(base.kernel),
            nu: self.nu.or(base.nu),
            nu_grid: self.nu_grid.or(base.nu_grid),
            tau: self.tau.or(base.tau),
            link: self.link.or(base.link),
            harmonics: self.harmonics.or(base.harmonics),
            holdout: self.holdout.or(base.holdout),
            horizon: self.horizon.or(base.horizon),
            seed: self.seed.or(base.seed),
            reps: self.reps.or(base.reps),
            burn_in: self.burn_in.or(base.burn_in),
            n: self.n.or(base.n),
            scenario: self.scenario.or(base.scenario),
            tau_grid: self.tau_grid.or(base.tau_grid),
            svg: self.svg || base.svg,
            estimator: self.estimator.or(base.estimator),
        })
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("quls-out"))
    }

    pub fn model_orders(&self) -> Result<(usize, usize), CliError> {
        let text = self.model.as_deref().unwrap_or("arma:1,0");
        let rest = text
            .strip_prefix("arma:")
            .ok_or_else(|| CliError(format!("bad model '{text}', expected arma:P,Q")))?;
        let (p, q) = rest
            .split_once(',')
            .ok_or_else(|| CliError(format!("bad model '{text}', expected arma:P,Q")))?;
        let parse = |s: &str| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| CliError(format!("bad model order '{s}'")))
        };
        Ok((parse(p)?, parse(q)?))
    }

    pub fn link_choice(&self) -> Result<quls_arma::LinkFunction, CliError> {
        match self.link.as_deref().unwrap_or("logit") {
            "logit" => Ok(quls_arma::LinkFunction::Logit),
            "probit" => Ok(quls_arma::LinkFunction::Probit),
            "cloglog" => Ok(quls_arma::LinkFunction::Cloglog),
            other => Err(CliError(format!("unknown link '{other}'"))),
        }
    }

    /// The kernel plus whether a grid search over the degrees of freedom
    /// was requested.
    pub fn kernel_choice(&self) -> Result<(quls_arma::SymmetricKernel, Option<Vec<f64>>), CliError> {
        match self.kernel.as_deref().unwrap_or("normal") {
            "normal" => {
                if self.nu.is_some() || self.nu_grid.is_some() {
                    return Err(CliError(
                        "nu / nu-grid only apply to the t kernel".into(),
                    ));
                }
                Ok((quls_arma::SymmetricKernel::Normal, None))
            }
            "t" => {
                let grid = match &self.nu_grid {
                    Some(text) => Some(parse_list(text)?),
                    None => None,
                };
                let nu = self.nu.unwrap_or(3.0);
                let kernel = quls_arma::SymmetricKernel::student_t(nu)
                    .map_err(|e| CliError(e.to_string()))?;
                Ok((kernel, grid))
            }
            other => Err(CliError(format!("unknown kernel '{other}'"))),
        }
    }

    pub fn tau_value(&self) -> f64 {
        self.tau.unwrap_or(0.5)
    }

    pub fn n_list(&self) -> Result<Vec<usize>, CliError> {
        let text = self.n.as_deref().unwrap_or("400");
        text.split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .map_err(|_| CliError(format!("bad sample size '{s}'")))
            })
            .collect()
    }

    pub fn tau_grid_values(&self) -> Result<Vec<f64>, CliError> {
        let text = self.tau_grid.as_deref().unwrap_or("0.01:0.01:0.99");
        if let Some((start, rest)) = text.split_once(':') {
            let (step, end) = rest
                .split_once(':')
                .ok_or_else(|| CliError(format!("bad tau grid '{text}'")))?;
            let (start, step, end) = (
                parse_f64(start)?,
                parse_f64(step)?,
                parse_f64(end)?,
            );
            if step <= 0.0 || start <= 0.0 || end >= 1.0 || start > end {
                return Err(CliError(format!("bad tau grid '{text}'")));
            }
            let mut taus = Vec::new();
            let mut t = start;
            while t <= end + 1e-12 {
                taus.push((t * 1e12).round() / 1e12);
                t += step;
            }
            Ok(taus)
        } else {
            let taus = parse_list(text)?;
            if taus.iter().any(|t| !(*t > 0.0 && *t < 1.0)) {
                return Err(CliError(format!("tau grid values must lie in (0,1): '{text}'")));
            }
            Ok(taus)
        }
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| CliError(format!("bad number '{s}'")))
}

fn parse_list(text: &str) -> Result<Vec<f64>, CliError> {
    let vals: Result<Vec<f64>, CliError> = text.split(',').map(parse_f64).collect();
    let vals = vals?;
    if vals.is_empty() {
        return Err(CliError(format!("empty list '{text}'")));
    }
    Ok(vals)
}
