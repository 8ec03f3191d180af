//! Projection-based specification tests for parametric propensity-score
//! models.
//!
//! The pipeline is:
//!
//! 1. [`model::fit_mle`] (or [`model::fit_nlls`]) fits a probit or logit
//!    propensity score to a [`Dataset`].
//! 2. [`projection`] builds the indicator weights on the jump grid of the
//!    fitted propensities and projects them onto the orthogonal complement
//!    of the score gradient.
//! 3. [`stats`] evaluates the Cramér–von Mises and Kolmogorov–Smirnov
//!    functionals of the projected process.
//! 4. [`bootstrap`] approximates their null distribution with Mammen
//!    multipliers.
//!
//! [`kernel_test`] implements the competing smoothing-based test and
//! [`mc`] drives Monte Carlo size/power experiments.

// `!(x > 0.0)` is used on purpose so that NaN is rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bootstrap;
pub mod error;
mod linalg;
pub mod mc;
pub mod model;
pub mod projection;
pub mod seed;
pub mod stats;
#[cfg(test)]
mod test_support;

pub use bootstrap::{run_bootstrap, MultiplierSpec, TestResult, DEFAULT_ALPHAS};
pub use error::{Error, Result};
pub use kernel_test::{t_test, KernelTestResult};
pub use model::{fit, fit_mle, fit_nlls, Dataset, Estimator, FittedModel, LinkFamily};
pub use projection::{ProjectedProcess, ProjectionParts, WeightMatrix};
pub use stats::StatPair;

/// Fits nothing: runs the projection, statistics and bootstrap on an
/// already fitted model.
pub fn projection_test(fitted: &FittedModel, b: usize, seed: u64) -> Result<TestResult> {
    let wmat = projection::build_weights(fitted);
    let parts = projection::build_projection(fitted, &wmat)?;
    let proc = projection::project_weights(fitted, &wmat, &parts)?;
    Ok(run_bootstrap(fitted, &proc, b, seed))
}
