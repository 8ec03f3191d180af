//! Indicator weights on the jump grid of the fitted propensities and their
//! projection onto the orthogonal complement of the score gradient.
//!
//! With `w(q, u) = 1{q <= u}` the process `u ↦ R(u)` is a right-continuous
//! step function that jumps only at fitted values and vanishes left of the
//! smallest one, so every functional used here is computed exactly on the
//! sorted unique fitted values ("knots").

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::Result;
use crate::linalg::spd_factor;
use crate::model::FittedModel;

/// Indicator weights `w[i, j] = 1{qhat_i <= u_j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightMatrix {
    /// Sorted unique fitted propensities.
    pub u_grid: Vec<f64>,
    /// `n × m`.
    pub w: DMatrix<f64>,
    /// Index of `qhat_i` in `u_grid`.
    pub knot_of_obs: Vec<usize>,
}

impl WeightMatrix {
    pub fn m(&self) -> usize {
        self.u_grid.len()
    }

    /// Number of observations sitting on each knot.
    pub fn knot_counts(&self) -> Vec<usize> {
        let mut counts = vec![0; self.m()];
        for &j in &self.knot_of_obs {
            counts[j] += 1;
        }
        counts
    }
}

/// Sample projection ingredients.
#[derive(Debug, Clone)]
pub struct ProjectionParts {
    /// `Δ_n = (1/n) Σ g_i g_i'`, `k × k`.
    pub gram: DMatrix<f64>,
    pub gram_solve: Cholesky<f64, Dyn>,
    /// Column `j` is `G_n(u_j) = (1/n) Σ g_i w[i, j]`, `k × m`.
    pub gbar: DMatrix<f64>,
    /// `Δ_n⁻¹ G_n(u_j)`, the projection coefficients, `k × m`.
    pub coef: DMatrix<f64>,
}

/// The projected empirical process on the knot grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedProcess {
    pub u_grid: Vec<f64>,
    pub knot_of_obs: Vec<usize>,
    /// Projected weights, `n × m`.
    pub pw: DMatrix<f64>,
    /// Process value at each knot.
    pub rp: DVector<f64>,
    /// Process value at each observation's own fitted propensity.
    pub rp_at_obs: DVector<f64>,
    /// Projection coefficients, copied from [`ProjectionParts::coef`].
    pub coef: DMatrix<f64>,
}

impl ProjectedProcess {
    pub fn n(&self) -> usize {
        self.pw.nrows()
    }

    pub fn m(&self) -> usize {
        self.u_grid.len()
    }

    /// Evaluates the step function at an arbitrary `u`.
    pub fn eval(&self, u: f64) -> f64 {
        step_eval(&self.u_grid, self.rp.as_slice(), u)
    }
}

/// Value of the right-continuous step function with knots `grid` and
/// levels `values` at `u` (zero left of the first knot).
pub fn step_eval(grid: &[f64], values: &[f64], u: f64) -> f64 {
    let pos = grid.partition_point(|&g| g <= u);
    if pos == 0 {
        0.0
    } else {
        values[pos - 1]
    }
}

/// Sorted unique fitted propensities and the knot index of each observation.
pub fn knots(qhat: &DVector<f64>) -> (Vec<f64>, Vec<usize>) {
    let mut grid: Vec<f64> = qhat.iter().copied().collect();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let knot_of_obs = qhat
        .iter()
        .map(|q| grid.partition_point(|g| g < q))
        .collect();
    (grid, knot_of_obs)
}

pub fn build_weights(fitted: &FittedModel) -> WeightMatrix {
    let (u_grid, knot_of_obs) = knots(&fitted.qhat);
    let n = fitted.n();
    let m = u_grid.len();
    let w = DMatrix::from_fn(n, m, |i, j| if knot_of_obs[i] <= j { 1.0 } else { 0.0 });
    WeightMatrix {
        u_grid,
        w,
        knot_of_obs,
    }
}

/// `Δ_n`, its factorization and `G_n(u_j)` on the knot grid.
///
/// `G_n` is accumulated by bucketing gradient rows per knot and taking
/// prefix sums, which equals `(1/n) gradᵀ w` without forming the product.
pub fn build_projection(fitted: &FittedModel, wmat: &WeightMatrix) -> Result<ProjectionParts> {
    let n = fitted.n() as f64;
    let k = fitted.k();
    let m = wmat.m();
    let grad = &fitted.grad;
    let mut gram = grad.tr_mul(grad) / n;
    gram = (&gram + gram.transpose()) * 0.5;
    let gram_solve = spd_factor(&gram, "gradient Gram matrix")?;

    let mut gbar = DMatrix::zeros(k, m);
    for (i, &j) in wmat.knot_of_obs.iter().enumerate() {
        for c in 0..k {
            gbar[(c, j)] += grad[(i, c)];
        }
    }
    for j in 1..m {
        for c in 0..k {
            gbar[(c, j)] += gbar[(c, j - 1)];
        }
    }
    gbar /= n;
    let coef = gram_solve.solve(&gbar);
    Ok(ProjectionParts {
        gram,
        gram_solve,
        gbar,
        coef,
    })
}

/// `P_n w = w - grad Δ_n⁻¹ G_n` and the projected process.
pub fn project_weights(
    fitted: &FittedModel,
    wmat: &WeightMatrix,
    parts: &ProjectionParts,
) -> Result<ProjectedProcess> {
    let pw = &wmat.w - &fitted.grad * &parts.coef;
    let rp = process_from_weights(&pw, &fitted.resid);
    let rp_at_obs = DVector::from_iterator(fitted.n(), wmat.knot_of_obs.iter().map(|&j| rp[j]));
    Ok(ProjectedProcess {
        u_grid: wmat.u_grid.clone(),
        knot_of_obs: wmat.knot_of_obs.clone(),
        pw,
        rp,
        rp_at_obs,
        coef: parts.coef.clone(),
    })
}

/// `R(u_j) = (1/√n) Σ resid_i w[i, j]` without projection.
pub fn unprojected_process(fitted: &FittedModel, wmat: &WeightMatrix) -> DVector<f64> {
    process_from_weights(&wmat.w, &fitted.resid)
}

/// `(1/√n) weightsᵀ resid`, summed over `i` in index order.
pub(crate) fn process_from_weights(weights: &DMatrix<f64>, resid: &DVector<f64>) -> DVector<f64> {
    let n = weights.nrows();
    let scale = 1.0 / (n as f64).sqrt();
    DVector::from_iterator(
        weights.ncols(),
        weights.column_iter().map(|col| {
            let mut acc = 0.0;
            for i in 0..n {
                acc += resid[i] * col[i];
            }
            acc * scale
        }),
    )
}

/// Fits, projects and evaluates in one call.
pub fn projected_process(fitted: &FittedModel) -> Result<ProjectedProcess> {
    let wmat = build_weights(fitted);
    let parts = build_projection(fitted, &wmat)?;
    project_weights(fitted, &wmat, &parts)
}
