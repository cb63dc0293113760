//! Input parsing and covariate assembly.
//!
//! Input files are comma-delimited with a header row. A column named
//! `value` holds the series (required, strictly inside (0,1)); a column
//! named `date` or `t` is kept as row labels; every other column is a
//! covariate in file order. A covariate column that is empty in every row
//! is treated as absent - that is the shipping convention for the bundled
//! dataset's `crisis` placeholder column.

use std::path::Path;

use quls_arma::model::BoundedSeries;
use quls_arma::simulate::harmonic_covariates;

use crate::CliError;

pub struct LoadedSeries {
    pub series: BoundedSeries,
    /// Names of the covariate columns that were kept, in order.
    pub covariate_names: Vec<String>,
}

pub fn load_series(path: &Path) -> Result<LoadedSeries, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError(format!("cannot open {}: {e}", path.display())))?;

    let headers: Vec<String> = reader
        .headers()
        .map_err(|e| CliError(format!("{}: {e}", path.display())))?
        .iter()
        .map(|h| h.trim().to_string())
        .collect();
    let value_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("value"))
        .ok_or_else(|| CliError(format!("{}: no 'value' column in header", path.display())))?;
    let date_col = headers
        .iter()
        .position(|h| h.eq_ignore_ascii_case("date") || h.eq_ignore_ascii_case("t"));

    let mut values = Vec::new();
    let mut labels = Vec::new();
    let mut covariate_cells: Vec<Vec<Option<f64>>> = Vec::new();
    let covariate_cols: Vec<usize> = (0..headers.len())
        .filter(|&i| i != value_col && Some(i) != date_col)
        .collect();

    for (row_idx, record) in reader.records().enumerate() {
        let row_no = row_idx + 2; // header is line 1
        let record = record.map_err(|e| CliError(format!("{}: {e}", path.display())))?;
        let raw_value = record
            .get(value_col)
            .ok_or_else(|| CliError(format!("row {row_no}: missing value cell")))?
            .trim();
        let value: f64 = raw_value
            .parse()
            .map_err(|_| CliError(format!("row {row_no}: non-numeric value '{raw_value}'")))?;
        if !(value.is_finite() && value > 0.0 && value < 1.0) {
            return Err(CliError(format!(
                "row {row_no}: value {value} outside the open interval (0,1)"
            )));
        }
        values.push(value);
        if let Some(c) = date_col {
            labels.push(record.get(c).unwrap_or("").trim().to_string());
        }
        let mut cells = Vec::with_capacity(covariate_cols.len());
        for &c in &covariate_cols {
            let cell = record.get(c).unwrap_or("").trim();
            if cell.is_empty() {
                cells.push(None);
            } else {
                let v: f64 = cell.parse().map_err(|_| {
                    CliError(format!(
                        "row {row_no}: non-numeric cell '{cell}' in column '{}'",
                        headers[c]
                    ))
                })?;
                cells.push(Some(v));
            }
        }
        covariate_cells.push(cells);
    }

    if values.is_empty() {
        return Err(CliError(format!("{}: no data rows after the header", path.display())));
    }

    // Keep covariate columns that are fully populated; drop fully-empty
    // ones; anything in between is a data error.
    let mut kept_names = Vec::new();
    let mut kept: Vec<Vec<f64>> = Vec::new();
    for (j, &c) in covariate_cols.iter().enumerate() {
        let filled = covariate_cells.iter().filter(|row| row[j].is_some()).count();
        if filled == 0 {
            continue;
        }
        if filled != values.len() {
            return Err(CliError(format!(
                "column '{}' is partially empty ({filled} of {} rows)",
                headers[c],
                values.len()
            )));
        }
        kept_names.push(headers[c].clone());
        kept.push(covariate_cells.iter().map(|row| row[j].unwrap()).collect());
    }

    let k = kept.len();
    let mut flat = Vec::with_capacity(values.len() * k);
    for t in 0..values.len() {
        for col in &kept {
            flat.push(col[t]);
        }
    }
    let series = BoundedSeries::new(
        values,
        flat,
        k,
        if labels.is_empty() { None } else { Some(labels) },
    )
    .map_err(|e| CliError(e.to_string()))?;
    Ok(LoadedSeries { series, covariate_names: kept_names })
}

/// The bundled stored-energy dataset as a loaded series.
pub fn bundled() -> LoadedSeries {
    LoadedSeries {
        series: quls_arma::dataset::stored_energy(),
        covariate_names: Vec::new(),
    }
}

/// Prepends harmonic covariate columns (cos, sin with the given period) to
/// the series' design, indexing time from 1 at the first observation.
pub fn with_harmonics(loaded: LoadedSeries, period: usize) -> Result<LoadedSeries, CliError> {
    if period == 0 {
        return Err(CliError("harmonics period must be positive".into()));
    }
    let series = loaded.series;
    let n = series.len();
    let harmonics = harmonic_covariates(n, period);
    let k_old = series.k();
    let mut flat = Vec::with_capacity(n * (k_old + 2));
    for t in 0..n {
        flat.push(harmonics[t][0]);
        flat.push(harmonics[t][1]);
        flat.extend_from_slice(series.covariate_row(t));
    }
    let mut names = vec!["cos".to_string(), "sin".to_string()];
    names.extend(loaded.covariate_names);
    let series = BoundedSeries::new(
        series.y().to_vec(),
        flat,
        k_old + 2,
        series.labels().map(|l| l.to_vec()),
    )
    .map_err(|e| CliError(e.to_string()))?;
    Ok(LoadedSeries { series, covariate_names: names })
}

/// Harmonic rows for forecast horizons beyond the sample, continuing the
/// in-sample time index.
pub fn future_harmonics(n: usize, horizon: usize, period: usize) -> Vec<[f64; 2]> {
    let all = harmonic_covariates(n + horizon, period);
    all[n..].to_vec()
}
