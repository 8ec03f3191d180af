use std::fmt;
use std::str::FromStr;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::dataset::Dataset;
use super::link::{clamp_prob, LinkFamily};
use crate::error::{Error, Result};
use crate::linalg::{max_abs, rcond_sym, spd_factor, RCOND_THRESHOLD};

/// How `θ` is estimated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Estimator {
    /// Bernoulli maximum likelihood.
    Mle,
    /// Nonlinear least squares on `d - F(x'θ)`.
    Nlls,
}

impl fmt::Display for Estimator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Estimator::Mle => "mle",
            Estimator::Nlls => "nlls",
        })
    }
}

impl FromStr for Estimator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "mle" | "ml" => Ok(Estimator::Mle),
            "nlls" | "nls" => Ok(Estimator::Nlls),
            other => Err(format!(
                "unknown estimator `{other}` (expected mle or nlls)"
            )),
        }
    }
}

/// Newton iteration controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitOptions {
    pub max_iter: usize,
    /// Convergence when `|score|_inf <= score_tol_per_obs * n`.
    pub score_tol_per_obs: f64,
    pub step_tol: f64,
    pub max_halvings: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iter: 100,
            score_tol_per_obs: 1e-8,
            step_tol: 1e-10,
            max_halvings: 30,
        }
    }
}

/// A converged propensity-score fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub link: LinkFamily,
    pub estimator: Estimator,
    pub theta: DVector<f64>,
    /// Fitted propensities, clamped to `[PROB_FLOOR, 1 - PROB_FLOOR]`.
    pub qhat: DVector<f64>,
    /// `n × k`; row `i` is `F'(x_i'θ) x_i`.
    pub grad: DMatrix<f64>,
    /// `d - qhat`.
    pub resid: DVector<f64>,
    pub converged: bool,
    pub iterations: usize,
    /// `|score|_inf` at `theta`, in the estimator's own score units.
    pub gradient_norm: f64,
    /// Log-likelihood (MLE) or residual sum of squares (NLLS) at `theta`.
    pub objective: f64,
}

impl FittedModel {
    pub fn n(&self) -> usize {
        self.qhat.len()
    }

    pub fn k(&self) -> usize {
        self.theta.len()
    }

    /// Assembles the fitted quantities at a fixed `theta` without estimating
    /// anything. Useful for evaluating processes at a known parameter.
    pub fn at_theta(
        data: &Dataset,
        link: LinkFamily,
        estimator: Estimator,
        theta: DVector<f64>,
    ) -> Self {
        let x = data.x();
        let z = x * &theta;
        let qhat = z.map(|zi| clamp_prob(link.cdf(zi)));
        let mut grad = x.clone();
        for (i, mut row) in grad.row_iter_mut().enumerate() {
            row *= link.density(z[i]);
        }
        let resid = data.d() - &qhat;
        let mut fm = Self {
            link,
            estimator,
            theta,
            qhat,
            grad,
            resid,
            converged: false,
            iterations: 0,
            gradient_norm: f64::NAN,
            objective: f64::NAN,
        };
        let eval = Objective::new(data, link, estimator).eval(&fm.theta, false);
        fm.gradient_norm = max_abs(eval.score.iter().copied());
        fm.objective = match estimator {
            Estimator::Mle => eval.value,
            Estimator::Nlls => -2.0 * eval.value,
        };
        fm
    }
}

/// `F'(x'θ) x`.
pub fn gradient_row(link: LinkFamily, x: &DVector<f64>, theta: &DVector<f64>) -> DVector<f64> {
    x * link.density(x.dot(theta))
}

/// Dispatches on `estimator`.
pub fn fit(data: &Dataset, link: LinkFamily, estimator: Estimator) -> Result<FittedModel> {
    match estimator {
        Estimator::Mle => fit_mle(data, link),
        Estimator::Nlls => fit_nlls(data, link),
    }
}

/// Maximum likelihood by Newton–Raphson with step halving, starting at zero.
///
/// A constant treatment vector is reported as `NoConvergence`: the
/// intercept is pushed to infinity and the maximum is never attained.
pub fn fit_mle(data: &Dataset, link: LinkFamily) -> Result<FittedModel> {
    if !data.has_variation() {
        return Err(Error::NoConvergence {
            iterations: 0,
            gradient_norm: f64::NAN,
            reason: "treatment is constant; the likelihood has no maximum (complete separation)"
                .into(),
        });
    }
    let fm = newton(data, link, Estimator::Mle, FitOptions::default())?;
    // With a finite maximizer the strictly concave likelihood drops when
    // the fitted index is doubled. If it does not, and some fits sit at
    // the probability floor, the optimizer stopped on a separating ray.
    let z = data.x() * &fm.theta;
    let saturated = z
        .iter()
        .any(|&zi| link.cdf(zi) < super::PROB_FLOOR || link.survival(zi) < super::PROB_FLOOR);
    if saturated {
        let obj = Objective::new(data, link, Estimator::Mle);
        let doubled = obj.value(&(&fm.theta * 2.0));
        if doubled >= fm.objective {
            return Err(Error::NoConvergence {
                iterations: fm.iterations,
                gradient_norm: fm.gradient_norm,
                reason: "likelihood increases without bound (quasi-complete separation)".into(),
            });
        }
    }
    Ok(fm)
}

/// Nonlinear least squares: minimizes `Σ (d_i - F(x_i'θ))²`.
pub fn fit_nlls(data: &Dataset, link: LinkFamily) -> Result<FittedModel> {
    if !data.has_variation() {
        return Err(Error::InvalidInput(
            "treatment is constant; both classes must be present".into(),
        ));
    }
    newton(data, link, Estimator::Nlls, FitOptions::default())
}

struct Eval {
    /// Objective to maximize (log-likelihood, or `-RSS / 2`).
    value: f64,
    score: DVector<f64>,
    /// Negative Hessian.
    neg_hessian: DMatrix<f64>,
    /// Positive semidefinite information-type matrix used when the
    /// negative Hessian is not positive definite.
    info: DMatrix<f64>,
}

struct Objective<'a> {
    data: &'a Dataset,
    link: LinkFamily,
    estimator: Estimator,
}

impl<'a> Objective<'a> {
    fn new(data: &'a Dataset, link: LinkFamily, estimator: Estimator) -> Self {
        Self {
            data,
            link,
            estimator,
        }
    }

    fn value(&self, theta: &DVector<f64>) -> f64 {
        let z = self.data.x() * theta;
        let d = self.data.d();
        match self.estimator {
            Estimator::Mle => z
                .iter()
                .zip(d.iter())
                .map(|(&zi, &di)| {
                    if di == 1.0 {
                        clamp_prob(self.link.cdf(zi)).ln()
                    } else {
                        clamp_prob(self.link.survival(zi)).ln()
                    }
                })
                .sum(),
            Estimator::Nlls => {
                -0.5 * z
                    .iter()
                    .zip(d.iter())
                    .map(|(&zi, &di)| {
                        let e = di - clamp_prob(self.link.cdf(zi));
                        e * e
                    })
                    .sum::<f64>()
            }
        }
    }

    fn eval(&self, theta: &DVector<f64>, with_hessian: bool) -> Eval {
        let x = self.data.x();
        let d = self.data.d();
        let n = x.nrows();
        let z = x * theta;
        let link = self.link;
        // Per-observation multipliers of x_i (score) and x_i x_i' (curvature).
        let mut s = DVector::zeros(n);
        let mut h = DVector::zeros(n);
        let mut inf = DVector::zeros(n);
        let mut value = 0.0;
        for i in 0..n {
            let zi = z[i];
            let q = clamp_prob(link.cdf(zi));
            let qc = clamp_prob(link.survival(zi));
            let f = link.density(zi);
            let fp = link.density_slope(zi);
            let e = d[i] - q;
            match self.estimator {
                Estimator::Mle => {
                    value += if d[i] == 1.0 { q.ln() } else { qc.ln() };
                    let v = q * qc;
                    let a = f / v;
                    let a_prime = (fp * v - f * f * (qc - q)) / (v * v);
                    s[i] = e * a;
                    h[i] = f * a - e * a_prime;
                    inf[i] = f * a;
                }
                Estimator::Nlls => {
                    value -= 0.5 * e * e;
                    s[i] = e * f;
                    h[i] = f * f - e * fp;
                    inf[i] = f * f;
                }
            }
        }
        let score = x.tr_mul(&s);
        let (neg_hessian, info) = if with_hessian {
            (weighted_gram(x, &h), weighted_gram(x, &inf))
        } else {
            (DMatrix::zeros(0, 0), DMatrix::zeros(0, 0))
        };
        Eval {
            value,
            score,
            neg_hessian,
            info,
        }
    }
}

/// `X' diag(w) X`.
fn weighted_gram(x: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut xw = x.clone();
    for (i, mut row) in xw.row_iter_mut().enumerate() {
        row *= w[i];
    }
    let g = x.tr_mul(&xw);
    // Symmetrize away rounding asymmetry.
    (&g + g.transpose()) * 0.5
}

fn newton_direction(ev: &Eval) -> Result<DVector<f64>> {
    if rcond_sym(&ev.neg_hessian) >= RCOND_THRESHOLD {
        if let Some(ch) = Cholesky::<f64, Dyn>::new(ev.neg_hessian.clone()) {
            return Ok(ch.solve(&ev.score));
        }
    }
    let ch = spd_factor(&ev.info, "information matrix")?;
    Ok(ch.solve(&ev.score))
}

fn newton(
    data: &Dataset,
    link: LinkFamily,
    estimator: Estimator,
    opts: FitOptions,
) -> Result<FittedModel> {
    let obj = Objective::new(data, link, estimator);
    let n = data.n();
    let tol = opts.score_tol_per_obs * n as f64;
    let mut theta = DVector::zeros(data.k());
    let mut ev = obj.eval(&theta, true);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < opts.max_iter {
        let gnorm = max_abs(ev.score.iter().copied());
        if gnorm <= tol {
            converged = true;
            break;
        }
        let step = newton_direction(&ev)?;
        iterations += 1;
        let mut t = 1.0;
        let mut accepted = None;
        for _ in 0..=opts.max_halvings {
            let cand = &theta + &step * t;
            let v = obj.value(&cand);
            if v.is_finite() && v >= ev.value {
                accepted = Some(cand);
                break;
            }
            t *= 0.5;
        }
        let Some(cand) = accepted else {
            return Err(Error::NoConvergence {
                iterations,
                gradient_norm: gnorm,
                reason: "step halving failed to improve the objective".into(),
            });
        };
        let step_norm = step.norm() * t;
        theta = cand;
        ev = obj.eval(&theta, true);
        if step_norm <= opts.step_tol {
            converged = true;
            break;
        }
    }
    if !converged {
        return Err(Error::NoConvergence {
            iterations,
            gradient_norm: max_abs(ev.score.iter().copied()),
            reason: format!("iteration cap {} reached", opts.max_iter),
        });
    }

    // One polishing step; Newton is quadratic here, so this usually drives
    // the score down to rounding level.
    if let Ok(step) = newton_direction(&ev) {
        let cand = &theta + &step;
        let cand_ev = obj.eval(&cand, true);
        let old = max_abs(ev.score.iter().copied());
        let new = max_abs(cand_ev.score.iter().copied());
        if cand_ev.value.is_finite()
            && cand_ev.value >= ev.value - 1e-12 * ev.value.abs().max(1.0)
            && new <= old
        {
            theta = cand;
            ev = cand_ev;
        }
    }

    let mut fm = FittedModel::at_theta(data, link, estimator, theta);
    fm.converged = true;
    fm.iterations = iterations;
    fm.gradient_norm = max_abs(ev.score.iter().copied());
    Ok(fm)
}
