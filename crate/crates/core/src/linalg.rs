use nalgebra::{Cholesky, DMatrix, Dyn, SymmetricEigen};

use crate::error::{Error, Result};

/// Reciprocal condition threshold below which a symmetric system is
/// declared singular.
pub(crate) const RCOND_THRESHOLD: f64 = 1e-12;

/// Ratio of smallest to largest absolute eigenvalue of a symmetric matrix.
pub(crate) fn rcond_sym(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(a.clone());
    let mut lo = f64::INFINITY;
    let mut hi = 0.0_f64;
    for &v in eig.eigenvalues.iter() {
        lo = lo.min(v);
        hi = hi.max(v.abs());
    }
    if !(hi > 0.0) || !lo.is_finite() || lo <= 0.0 {
        return 0.0;
    }
    lo / hi
}

/// Cholesky factor of a symmetric positive definite matrix, or
/// `SingularDesign` when it is too badly conditioned.
pub(crate) fn spd_factor(a: &DMatrix<f64>, what: &'static str) -> Result<Cholesky<f64, Dyn>> {
    let rcond = rcond_sym(a);
    if !(rcond >= RCOND_THRESHOLD) {
        return Err(Error::SingularDesign {
            what,
            rcond,
            threshold: RCOND_THRESHOLD,
        });
    }
    Cholesky::new(a.clone()).ok_or(Error::SingularDesign {
        what,
        rcond,
        threshold: RCOND_THRESHOLD,
    })
}

pub(crate) fn max_abs(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, |m, x| m.max(x.abs()))
}
