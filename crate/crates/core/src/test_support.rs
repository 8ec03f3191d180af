//! Hand-built fixtures shared by unit tests.

use nalgebra::{DMatrix, DVector};

use crate::model::{Estimator, FittedModel, LinkFamily};

/// A fitted-model shell with hand-chosen `qhat`, gradient rows and
/// residuals.
pub(crate) fn shell(qhat: &[f64], grad: &[&[f64]], resid: &[f64]) -> FittedModel {
    let n = qhat.len();
    let k = grad[0].len();
    FittedModel {
        link: LinkFamily::Probit,
        estimator: Estimator::Mle,
        theta: DVector::zeros(k),
        qhat: DVector::from_row_slice(qhat),
        grad: DMatrix::from_fn(n, k, |i, c| grad[i][c]),
        resid: DVector::from_row_slice(resid),
        converged: true,
        iterations: 0,
        gradient_norm: 0.0,
        objective: 0.0,
    }
}

/// Four observations, two gradient columns.
pub(crate) fn hand4() -> FittedModel {
    shell(
        &[0.3, 0.7, 0.1, 0.5],
        &[&[0.35, 0.2], &[0.31, -0.4], &[0.18, 0.05], &[0.40, 0.9]],
        &[0.7, -0.7, -0.1, 0.5],
    )
}
