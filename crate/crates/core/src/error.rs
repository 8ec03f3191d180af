use thiserror::Error;

/// Errors raised while fitting a model or computing a test.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// A Hessian or Gram matrix failed the reciprocal-condition check.
    #[error(
        "singular design: {what} has reciprocal condition {rcond:.3e} (threshold {threshold:.0e})"
    )]
    SingularDesign {
        what: &'static str,
        rcond: f64,
        threshold: f64,
    },

    #[error("no convergence after {iterations} iterations (|score|_inf = {gradient_norm:.3e}): {reason}")]
    NoConvergence {
        iterations: usize,
        gradient_norm: f64,
        reason: String,
    },

    #[error("kernel variance estimate is zero (all residuals vanish)")]
    DegenerateVariance,

    #[error("degenerate draw: treatment vector is constant ({attempts} attempt(s))")]
    DegenerateDraw { attempts: usize },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
