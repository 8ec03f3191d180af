//! Strict CSV ingestion.

use std::path::Path;

use nalgebra::DMatrix;
use projtest_core::{Dataset, Error, Result};

fn invalid(msg: String) -> Error {
    Error::InvalidInput(msg)
}

fn csv_error(e: csv::Error) -> Error {
    let line = e.position().map(|p| p.line());
    match (e.kind(), line) {
        (
            csv::ErrorKind::UnequalLengths {
                expected_len, len, ..
            },
            Some(line),
        ) => invalid(format!(
            "line {line}: expected {expected_len} fields, found {len}"
        )),
        (_, Some(line)) => invalid(format!("line {line}: {e}")),
        _ => invalid(format!("malformed CSV: {e}")),
    }
}

/// Reads `path` into a dataset with `treatment` as `d` and the chosen
/// covariates (all other columns when `covariates` is `None`) as `x`.
/// A leading column of ones named `intercept` is added when `intercept`
/// is set.
pub fn load_dataset(
    path: &Path,
    treatment: &str,
    covariates: Option<&[String]>,
    intercept: bool,
) -> Result<Dataset> {
    let bytes =
        std::fs::read(path).map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(bytes.as_slice());
    let headers: Vec<String> = rdr
        .headers()
        .map_err(csv_error)?
        .iter()
        .map(str::to_string)
        .collect();
    if headers.is_empty() || headers.iter().all(|h| h.is_empty()) {
        return Err(invalid("line 1: header row required, file is empty".into()));
    }
    if headers.iter().all(|h| h.trim().parse::<f64>().is_ok()) {
        return Err(invalid(format!(
            "line 1: header row required, but the first line looks like data ({})",
            headers.join(",")
        )));
    }
    for (j, h) in headers.iter().enumerate() {
        if headers[..j].contains(h) {
            return Err(invalid(format!("line 1: duplicate column name '{h}'")));
        }
    }
    let col = |name: &str| {
        headers.iter().position(|h| h == name).ok_or_else(|| {
            invalid(format!(
                "column '{name}' not found in header ({})",
                headers.join(",")
            ))
        })
    };

    let t_col = col(treatment)?;
    let cov_cols: Vec<usize> = match covariates {
        Some(names) => {
            if names.iter().any(|c| c == treatment) {
                return Err(invalid(format!(
                    "treatment column '{treatment}' also listed as a covariate"
                )));
            }
            names.iter().map(|c| col(c)).collect::<Result<_>>()?
        }
        None => (0..headers.len()).filter(|&j| j != t_col).collect(),
    };

    let mut d = Vec::new();
    let mut values: Vec<Vec<f64>> = Vec::new();
    for record in rdr.records() {
        let record = record.map_err(csv_error)?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |j: usize| record.get(j).unwrap_or("");
        d.push(match field(t_col) {
            "0" => 0.0,
            "1" => 1.0,
            other => {
                return Err(invalid(format!(
                    "line {line}, column '{treatment}': treatment must be 0 or 1, found '{other}'"
                )))
            }
        });
        let mut row = Vec::with_capacity(cov_cols.len());
        for &j in &cov_cols {
            let raw = field(j);
            match raw.parse::<f64>() {
                Ok(v) if v.is_finite() => row.push(v),
                _ => {
                    return Err(invalid(format!(
                        "line {line}, column '{}': '{raw}' is not a finite number",
                        headers[j]
                    )))
                }
            }
        }
        values.push(row);
    }
    if d.is_empty() {
        return Err(invalid("no data rows after the header".into()));
    }

    let offset = usize::from(intercept);
    let k = cov_cols.len() + offset;
    let x = DMatrix::from_fn(d.len(), k, |i, j| {
        if j < offset {
            1.0
        } else {
            values[i][j - offset]
        }
    });
    let mut names: Vec<String> = Vec::with_capacity(k);
    if intercept {
        names.push("intercept".into());
    }
    names.extend(cov_cols.iter().map(|&j| headers[j].clone()));
    Dataset::new(d, x, names)
}
