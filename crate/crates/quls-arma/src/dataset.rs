//! Bundled example dataset: monthly proportion of stored hydroelectric
//! energy in the Southeast region of Brazil, May 2000 through October 2018
//! (222 months).
//!
//! The CSV shipped with the crate has columns `date,value,crisis`. The
//! crisis column is intentionally empty: flagging stress periods is a
//! modeling choice, so users who want the indicator supply their own 0/1
//! column (an all-empty covariate column means "absent" by convention).

use crate::error::{Error, Result};
use crate::model::BoundedSeries;

const STORED_ENERGY_CSV: &str = include_str!("../data/stored_energy.csv");

/// The bundled stored-energy series with `YYYY-MM` labels and no covariates.
pub fn stored_energy() -> BoundedSeries {
    parse_bundled(STORED_ENERGY_CSV).expect("bundled dataset is valid")
}

/// Raw (label, value) rows of the bundled dataset.
pub fn stored_energy_rows() -> Vec<(String, f64)> {
    let series = stored_energy();
    series
        .labels()
        .expect("bundled dataset has labels")
        .iter()
        .cloned()
        .zip(series.y().iter().copied())
        .collect()
}

fn parse_bundled(csv: &str) -> Result<BoundedSeries> {
    let mut labels = Vec::new();
    let mut values = Vec::new();
    for (i, line) in csv.lines().enumerate() {
        if i == 0 {
            continue; // header
        }
        let mut parts = line.split(',');
        let date = parts
            .next()
            .ok_or_else(|| Error::Input(format!("row {i}: missing date")))?;
        let value: f64 = parts
            .next()
            .ok_or_else(|| Error::Input(format!("row {i}: missing value")))?
            .parse()
            .map_err(|e| Error::Input(format!("row {i}: {e}")))?;
        labels.push(date.to_string());
        values.push(value);
    }
    BoundedSeries::new(values, Vec::new(), 0, Some(labels))
}
