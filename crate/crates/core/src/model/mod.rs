//! Parametric propensity-score families and their estimation.

mod dataset;
mod fit;
mod link;

pub use dataset::Dataset;
pub use fit::{fit, fit_mle, fit_nlls, gradient_row, Estimator, FitOptions, FittedModel};
pub use link::{link_density, link_eval, LinkFamily, PROB_FLOOR};
