//! Multiplier bootstrap with Mammen two-point weights.
//!
//! Each replicate perturbs the summands of the projected process by i.i.d.
//! multipliers `V_i` while holding the residuals and projected weights
//! fixed; nothing is re-estimated.

use nalgebra::DVector;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::model::FittedModel;
use crate::projection::{process_from_weights, ProjectedProcess};
use crate::seed::stream_rng;
use crate::stats::{cvm_from_obs, ks_from_knots, StatPair};

/// Significance levels reported by default.
pub const DEFAULT_ALPHAS: [f64; 3] = [0.01, 0.05, 0.10];

/// Mammen's two-point law: `1 - κ` with probability `κ/√5`, `κ` otherwise,
/// where `κ = (√5 + 1)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiplierSpec {
    pub values: (f64, f64),
    pub probabilities: (f64, f64),
}

impl MultiplierSpec {
    pub fn mammen() -> Self {
        let sqrt5 = 5f64.sqrt();
        let kappa = (sqrt5 + 1.0) / 2.0;
        let p = kappa / sqrt5;
        Self {
            values: (1.0 - kappa, kappa),
            probabilities: (p, 1.0 - p),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.0 * self.probabilities.0 + self.values.1 * self.probabilities.1
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        let (a, b) = self.values;
        (a - m).powi(2) * self.probabilities.0 + (b - m).powi(2) * self.probabilities.1
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if rng.random::<f64>() < self.probabilities.0 {
            self.values.0
        } else {
            self.values.1
        }
    }
}

impl Default for MultiplierSpec {
    fn default() -> Self {
        Self::mammen()
    }
}

/// `n` i.i.d. Mammen multipliers.
pub fn draw_multipliers<R: Rng + ?Sized>(n: usize, rng: &mut R) -> DVector<f64> {
    let spec = MultiplierSpec::mammen();
    DVector::from_iterator(n, (0..n).map(|_| spec.draw(rng)))
}

/// `R*(u_j) = (1/√n) Σ resid_i pw[i, j] v_i`, computed directly from the
/// dense projected weights.
pub fn bootstrap_process(
    proc: &ProjectedProcess,
    resid: &DVector<f64>,
    v: &DVector<f64>,
) -> DVector<f64> {
    let rv = resid.component_mul(v);
    process_from_weights(&proc.pw, &rv)
}

/// Bootstrap critical values at one significance level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalValue {
    pub alpha: f64,
    pub cvm: f64,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub stats: StatPair,
    pub boot_cvm: Vec<f64>,
    pub boot_ks: Vec<f64>,
    pub pval_cvm: f64,
    pub pval_ks: f64,
    pub crit: Vec<CriticalValue>,
    pub b: usize,
    pub seed: u64,
}

impl TestResult {
    pub fn crit_at(&self, alpha: f64) -> Option<&CriticalValue> {
        self.crit.iter().find(|c| (c.alpha - alpha).abs() < 1e-12)
    }

    /// Rejection by p-value, `pval <= alpha`.
    pub fn reject_cvm(&self, alpha: f64) -> bool {
        self.pval_cvm <= alpha
    }

    pub fn reject_ks(&self, alpha: f64) -> bool {
        self.pval_ks <= alpha
    }
}

/// `(1 + #{replicates >= observed}) / (B + 1)`.
pub fn bootstrap_pvalue(observed: f64, replicates: &[f64]) -> f64 {
    let exceed = replicates.iter().filter(|&&r| r >= observed).count();
    (1 + exceed) as f64 / (replicates.len() + 1) as f64
}

/// The `⌈B(1 - α)⌉`-th smallest replicate.
pub fn critical_value(replicates: &[f64], alpha: f64) -> f64 {
    let mut sorted = replicates.to_vec();
    sorted.sort_by(f64::total_cmp);
    order_statistic(&sorted, alpha)
}

fn order_statistic(sorted: &[f64], alpha: f64) -> f64 {
    let b = sorted.len();
    // Guard against 1000 * 0.95 landing a hair above 950.
    let rank = ((b as f64) * (1.0 - alpha) - 1e-9).ceil() as usize;
    sorted[rank.clamp(1, b) - 1]
}

/// Replicate statistics from the factored form of the projected process:
///
/// `√n R*(u_j) = Σ_{knot(i) <= j} r_i v_i - (Σ_i r_i v_i g_i)' coef_j`,
///
/// which equals the dense sum over `pw` but costs `O(n k + m k)` per draw.
struct ReplicateKernel<'a> {
    fitted: &'a FittedModel,
    proc: &'a ProjectedProcess,
    counts: Vec<f64>,
    scale: f64,
}

struct Scratch {
    rv: Vec<f64>,
    knot_sum: Vec<f64>,
    a: Vec<f64>,
}

impl<'a> ReplicateKernel<'a> {
    fn new(fitted: &'a FittedModel, proc: &'a ProjectedProcess) -> Self {
        let mut counts = vec![0.0; proc.m()];
        for &j in &proc.knot_of_obs {
            counts[j] += 1.0;
        }
        Self {
            fitted,
            proc,
            counts,
            scale: 1.0 / (fitted.n() as f64).sqrt(),
        }
    }

    fn scratch(&self) -> Scratch {
        Scratch {
            rv: vec![0.0; self.fitted.n()],
            knot_sum: vec![0.0; self.proc.m()],
            a: vec![0.0; self.fitted.k()],
        }
    }

    fn replicate(&self, seed: u64, b: usize, s: &mut Scratch) -> (f64, f64) {
        let spec = MultiplierSpec::mammen();
        let mut rng = stream_rng(seed, b as u64);
        let resid = &self.fitted.resid;
        for (i, rv) in s.rv.iter_mut().enumerate() {
            *rv = resid[i] * spec.draw(&mut rng);
        }
        s.knot_sum.iter_mut().for_each(|x| *x = 0.0);
        for (i, &j) in self.proc.knot_of_obs.iter().enumerate() {
            s.knot_sum[j] += s.rv[i];
        }
        let grad = &self.fitted.grad;
        for (c, a) in s.a.iter_mut().enumerate() {
            *a = grad.column(c).iter().zip(&s.rv).map(|(g, r)| g * r).sum();
        }
        let coef = &self.proc.coef;
        let n = self.fitted.n() as f64;
        let mut running = 0.0;
        let mut cvm = 0.0;
        let mut ks = 0.0_f64;
        for j in 0..self.proc.m() {
            running += s.knot_sum[j];
            let col = coef.column(j);
            let adj: f64 = col.iter().zip(&s.a).map(|(c, a)| c * a).sum();
            let r = (running - adj) * self.scale;
            cvm += self.counts[j] * r * r;
            ks = ks.max(r.abs());
        }
        (cvm / n, ks)
    }
}

/// Runs `b` multiplier replicates with the default significance levels.
pub fn run_bootstrap(
    fitted: &FittedModel,
    proc: &ProjectedProcess,
    b: usize,
    seed: u64,
) -> TestResult {
    run_bootstrap_with_alphas(fitted, proc, b, seed, &DEFAULT_ALPHAS)
}

/// Runs `b` multiplier replicates. Replicate `r` draws its multipliers
/// from stream `r` under `seed`, so the result does not depend on how the
/// replicates are scheduled across threads.
pub fn run_bootstrap_with_alphas(
    fitted: &FittedModel,
    proc: &ProjectedProcess,
    b: usize,
    seed: u64,
    alphas: &[f64],
) -> TestResult {
    assert!(b >= 1, "bootstrap needs at least one replicate");
    let stats = StatPair::of(proc);
    let kernel = ReplicateKernel::new(fitted, proc);
    let reps: Vec<(f64, f64)> = (0..b)
        .into_par_iter()
        .map_init(|| kernel.scratch(), |s, r| kernel.replicate(seed, r, s))
        .collect();
    let (boot_cvm, boot_ks): (Vec<f64>, Vec<f64>) = reps.into_iter().unzip();

    let mut sorted_cvm = boot_cvm.clone();
    sorted_cvm.sort_by(f64::total_cmp);
    let mut sorted_ks = boot_ks.clone();
    sorted_ks.sort_by(f64::total_cmp);
    let crit = alphas
        .iter()
        .map(|&alpha| CriticalValue {
            alpha,
            cvm: order_statistic(&sorted_cvm, alpha),
            ks: order_statistic(&sorted_ks, alpha),
        })
        .collect();

    TestResult {
        stats,
        pval_cvm: bootstrap_pvalue(stats.cvm, &boot_cvm),
        pval_ks: bootstrap_pvalue(stats.ks, &boot_ks),
        boot_cvm,
        boot_ks,
        crit,
        b,
        seed,
    }
}

/// Replicate statistics for explicit multiplier vectors, through the dense
/// projected weights. Reference path for the factored kernel.
pub fn replicate_from_multipliers(
    proc: &ProjectedProcess,
    resid: &DVector<f64>,
    v: &DVector<f64>,
) -> StatPair {
    let rp = bootstrap_process(proc, resid, v);
    StatPair {
        cvm: cvm_from_obs(proc.knot_of_obs.iter().map(|&j| rp[j])),
        ks: ks_from_knots(rp.iter().copied()),
    }
}
