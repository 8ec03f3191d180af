use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::dgp::{generate_draw, DgpSpec};
use crate::error::{Error, Result};
use crate::model::{fit_mle, Dataset, LinkFamily};
use crate::seed::{derive, stream_rng};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EcdfRow {
    pub u: f64,
    pub ecdf_misspecified: f64,
    pub ecdf_correct: f64,
}

/// Empirical CDFs of fitted propensities from a misspecified and a
/// correctly specified probit on the same sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EcdfTable {
    pub n: usize,
    pub seed: u64,
    pub rows: Vec<EcdfRow>,
}

impl EcdfTable {
    pub fn sup_distance(&self) -> f64 {
        self.rows
            .iter()
            .map(|r| (r.ecdf_misspecified - r.ecdf_correct).abs())
            .fold(0.0, f64::max)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("u,ecdf_misspecified,ecdf_correct\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{}", r.u, r.ecdf_misspecified, r.ecdf_correct);
        }
        out
    }
}

fn ecdf_at(sorted: &[f64], u: f64) -> f64 {
    sorted.partition_point(|&q| q <= u) as f64 / sorted.len() as f64
}

/// Draws one sample of size `n` from design 7 (the interaction
/// alternative), fits the main-effects probit and the probit that adds
/// `X1·X2`, and tabulates both ECDFs on the union of fitted values.
pub fn ecdf_comparison(n: usize, seed: u64) -> Result<EcdfTable> {
    if n < 100 {
        return Err(Error::InvalidInput(format!(
            "ECDF comparison needs n >= 100, got {n}"
        )));
    }
    let spec = DgpSpec::new(7, n)?;
    let mut attempts = 0;
    let draw = loop {
        let mut rng = stream_rng(derive(seed, &[7, n as u64, attempts as u64]), 0);
        let draw = generate_draw(&spec, &mut rng);
        attempts += 1;
        let ones = draw.d.iter().filter(|&&v| v == 1.0).count();
        if ones > 0 && ones < n {
            break draw;
        }
        if attempts >= 100 {
            return Err(Error::DegenerateDraw { attempts });
        }
    };

    let null_x = draw.null_design();
    let k = null_x.ncols();
    let full_x = DMatrix::from_fn(n, k + 1, |i, j| {
        if j < k {
            null_x[(i, j)]
        } else {
            draw.x[(i, 0)] * draw.x[(i, 1)]
        }
    });
    let mut full_names = draw.null_names();
    full_names.push("x1_x2".into());

    let mis = fit_mle(
        &Dataset::new(draw.d.clone(), null_x, draw.null_names())?,
        LinkFamily::Probit,
    )?;
    let cor = fit_mle(
        &Dataset::new(draw.d.clone(), full_x, full_names)?,
        LinkFamily::Probit,
    )?;

    let mut qm: Vec<f64> = mis.qhat.iter().copied().collect();
    let mut qc: Vec<f64> = cor.qhat.iter().copied().collect();
    qm.sort_by(f64::total_cmp);
    qc.sort_by(f64::total_cmp);
    let mut grid: Vec<f64> = qm.iter().chain(&qc).copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();

    let rows = grid
        .into_iter()
        .map(|u| EcdfRow {
            u,
            ecdf_misspecified: ecdf_at(&qm, u),
            ecdf_correct: ecdf_at(&qc, u),
        })
        .collect();
    Ok(EcdfTable { n, seed, rows })
}
