//! Cramér–von Mises and Kolmogorov–Smirnov functionals of the projected
//! process.

use serde::{Deserialize, Serialize};

use crate::projection::ProjectedProcess;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StatPair {
    pub cvm: f64,
    pub ks: f64,
}

impl StatPair {
    pub fn of(proc: &ProjectedProcess) -> Self {
        Self {
            cvm: cvm_stat(proc),
            ks: ks_stat(proc),
        }
    }
}

/// `(1/n) Σ_i R(qhat_i)²`, one term per observation (ties included).
pub fn cvm_stat(proc: &ProjectedProcess) -> f64 {
    cvm_from_obs(proc.rp_at_obs.iter().copied())
}

/// `max_j |R(u_j)|` over the knots, which is the supremum over `[0, 1]`.
pub fn ks_stat(proc: &ProjectedProcess) -> f64 {
    ks_from_knots(proc.rp.iter().copied())
}

pub(crate) fn cvm_from_obs(values: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = values.len();
    if n == 0 {
        return 0.0;
    }
    values.map(|v| v * v).sum::<f64>() / n as f64
}

pub(crate) fn ks_from_knots(values: impl Iterator<Item = f64>) -> f64 {
    values.fold(0.0, |m, v| m.max(v.abs()))
}
