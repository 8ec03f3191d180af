//! Flat `key = value` simulation configs.
//!
//! Blank lines are ignored and `#` starts a comment. List values are
//! comma-separated. Keys:
//!
//! | key | value |
//! |---|---|
//! | `dgps` | design ids, e.g. `1,2,3` |
//! | `sample_sizes` | e.g. `200,400` |
//! | `reps` | replications per cell |
//! | `bootstrap` | multiplier replicates |
//! | `alphas` | significance levels |
//! | `bandwidths` | kernel-test constants `c` |
//! | `seed` | master seed |
//! | `estimator` | `mle` or `nlls` |
//! | `max_attempts` | draws per replication before giving up |

use std::str::FromStr;

use projtest_core::mc::McConfig;
use projtest_core::{Error, Result};

fn parse_one<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<T> {
    raw.trim().parse().map_err(|_| {
        Error::InvalidInput(format!(
            "config line {line}: cannot parse '{}' for {key}",
            raw.trim()
        ))
    })
}

fn parse_list<T: FromStr>(line: usize, key: &str, raw: &str) -> Result<Vec<T>> {
    raw.split(',').map(|v| parse_one(line, key, v)).collect()
}

/// Applies the settings in `text` on top of `base`.
pub fn parse_config(text: &str, mut base: McConfig) -> Result<McConfig> {
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let body = raw.split_once('#').map_or(raw, |(b, _)| b).trim();
        if body.is_empty() {
            continue;
        }
        let (key, value) = body.split_once('=').ok_or_else(|| {
            Error::InvalidInput(format!(
                "config line {line}: expected key = value, found '{body}'"
            ))
        })?;
        let key = key.trim();
        match key {
            "dgps" => base.dgps = parse_list(line, key, value)?,
            "sample_sizes" => base.sample_sizes = parse_list(line, key, value)?,
            "reps" => base.reps = parse_one(line, key, value)?,
            "bootstrap" => base.bootstrap = parse_one(line, key, value)?,
            "alphas" => base.alphas = parse_list(line, key, value)?,
            "bandwidths" => {
                base.bandwidths = if value.trim().is_empty() {
                    Vec::new()
                } else {
                    parse_list(line, key, value)?
                }
            }
            "seed" => base.seed = parse_one(line, key, value)?,
            "estimator" => base.estimator = parse_one(line, key, value)?,
            "max_attempts" => base.max_attempts = parse_one(line, key, value)?,
            other => {
                return Err(Error::InvalidInput(format!(
                    "config line {line}: unknown key '{other}'"
                )))
            }
        }
    }
    Ok(base)
}
