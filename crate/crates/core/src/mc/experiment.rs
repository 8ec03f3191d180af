use std::fmt::{self, Write as _};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::dgp::{generate, DgpSpec};
use crate::bootstrap::run_bootstrap_with_alphas;
use crate::error::{Error, Result};
use crate::kernel_test::{t_tests, KernelTestResult};
use crate::model::{fit, Estimator, LinkFamily};
use crate::projection::projected_process;
use crate::seed::derive;
use crate::stats::StatPair;

/// Monte Carlo design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub dgps: Vec<u8>,
    pub sample_sizes: Vec<usize>,
    pub reps: usize,
    pub bootstrap: usize,
    /// Bandwidth constants for the kernel test; empty skips it.
    pub bandwidths: Vec<f64>,
    pub alphas: Vec<f64>,
    pub seed: u64,
    pub estimator: Estimator,
    /// Attempts per replication before a cell is abandoned.
    pub max_attempts: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            dgps: vec![1],
            sample_sizes: vec![200],
            reps: 1000,
            bootstrap: 499,
            bandwidths: Vec::new(),
            alphas: vec![0.05],
            seed: 20_190_101,
            estimator: Estimator::Mle,
            max_attempts: 100,
        }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(m));
        if self.reps < 1 {
            return bad("reps must be at least 1".into());
        }
        if self.bootstrap < 1 {
            return bad("bootstrap must be at least 1".into());
        }
        if self.max_attempts < 1 {
            return bad("max_attempts must be at least 1".into());
        }
        if self.dgps.is_empty() || self.sample_sizes.is_empty() {
            return bad("need at least one DGP and one sample size".into());
        }
        if let Some(a) = self.alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
            return bad(format!("alpha {a} outside (0, 1)"));
        }
        if self.alphas.is_empty() {
            return bad("need at least one alpha".into());
        }
        if let Some(c) = self.bandwidths.iter().find(|c| !(**c > 0.0)) {
            return bad(format!("bandwidth constant {c} must be positive"));
        }
        for &d in &self.dgps {
            for &n in &self.sample_sizes {
                DgpSpec::new(d, n)?;
            }
        }
        Ok(())
    }
}

/// What one successful replication produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationOutcome {
    pub stats: StatPair,
    pub pval_cvm: f64,
    pub pval_ks: f64,
    pub kernel: Vec<KernelTestResult>,
    /// Failed attempts before this one succeeded.
    pub retries: usize,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FailureCounts {
    pub no_convergence: usize,
    pub singular_design: usize,
    pub degenerate_draw: usize,
    pub degenerate_variance: usize,
    pub other: usize,
}

impl FailureCounts {
    pub fn total(&self) -> usize {
        self.no_convergence
            + self.singular_design
            + self.degenerate_draw
            + self.degenerate_variance
            + self.other
    }

    fn record(&mut self, e: &Error) {
        match e {
            Error::NoConvergence { .. } => self.no_convergence += 1,
            Error::SingularDesign { .. } => self.singular_design += 1,
            Error::DegenerateDraw { .. } => self.degenerate_draw += 1,
            Error::DegenerateVariance => self.degenerate_variance += 1,
            Error::InvalidInput(_) => self.other += 1,
        }
    }

    fn merge(&mut self, o: &FailureCounts) {
        self.no_convergence += o.no_convergence;
        self.singular_design += o.singular_design;
        self.degenerate_draw += o.degenerate_draw;
        self.degenerate_variance += o.degenerate_variance;
        self.other += o.other;
    }
}

/// All replications of one `(dgp, n)` cell, in replication order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub dgp: u8,
    pub n: usize,
    pub outcomes: Vec<ReplicationOutcome>,
    pub failures: FailureCounts,
    pub bandwidths: Vec<f64>,
}

impl CellResult {
    pub fn reps(&self) -> usize {
        self.outcomes.len()
    }

    pub fn rate(&self, test: TestLabel, alpha: f64) -> f64 {
        let hits = self
            .outcomes
            .iter()
            .filter(|o| match test {
                TestLabel::Cvm => o.pval_cvm <= alpha,
                TestLabel::Ks => o.pval_ks <= alpha,
                TestLabel::Kernel(b) => o.kernel[b].reject(alpha),
            })
            .count();
        hits as f64 / self.reps() as f64
    }

    pub fn pvals_cvm(&self) -> Vec<f64> {
        self.outcomes.iter().map(|o| o.pval_cvm).collect()
    }

    /// Test labels available in this cell.
    pub fn tests(&self) -> Vec<TestLabel> {
        let mut t = vec![TestLabel::Cvm, TestLabel::Ks];
        t.extend((0..self.bandwidths.len()).map(TestLabel::Kernel));
        t
    }

    pub fn label(&self, test: TestLabel) -> String {
        match test {
            TestLabel::Cvm => "CvM".into(),
            TestLabel::Ks => "KS".into(),
            TestLabel::Kernel(b) => format!("T({})", fmt_c(self.bandwidths[b])),
        }
    }
}

fn fmt_c(c: f64) -> String {
    format!("{c:.2}")
}

/// A test column in a rejection table; `Kernel(b)` indexes the bandwidth list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestLabel {
    Cvm,
    Ks,
    Kernel(usize),
}

fn replicate_once(
    cfg: &McConfig,
    spec: &DgpSpec,
    rep: usize,
    attempt: usize,
) -> Result<ReplicationOutcome> {
    let path = [
        spec.id() as u64,
        spec.n() as u64,
        rep as u64,
        attempt as u64,
    ];
    let data_seed = derive(cfg.seed, &path);
    let boot_seed = derive(data_seed, &[1]);
    let mut rng = crate::seed::stream_rng(data_seed, 0);
    let ds = generate(spec, &mut rng)?;
    let fitted = fit(&ds, LinkFamily::Probit, cfg.estimator)?;
    let proc = projected_process(&fitted)?;
    let res = run_bootstrap_with_alphas(&fitted, &proc, cfg.bootstrap, boot_seed, &cfg.alphas);
    let kernel = if cfg.bandwidths.is_empty() {
        Vec::new()
    } else {
        t_tests(&fitted, &cfg.bandwidths)?
    };
    Ok(ReplicationOutcome {
        stats: res.stats,
        pval_cvm: res.pval_cvm,
        pval_ks: res.pval_ks,
        kernel,
        retries: 0,
    })
}

/// Runs every replication of one cell. A failed attempt is counted and
/// the replication is redrawn from the next attempt's stream; after
/// `max_attempts` failures the whole cell fails with the last error.
pub fn run_cell(cfg: &McConfig, dgp: u8, n: usize) -> Result<CellResult> {
    cfg.validate()?;
    let spec = DgpSpec::new(dgp, n)?;
    let results: Vec<Result<(ReplicationOutcome, FailureCounts)>> = (0..cfg.reps)
        .into_par_iter()
        .map(|rep| {
            let mut fails = FailureCounts::default();
            let mut last = None;
            for attempt in 0..cfg.max_attempts {
                match replicate_once(cfg, &spec, rep, attempt) {
                    Ok(mut o) => {
                        o.retries = attempt;
                        return Ok((o, fails));
                    }
                    Err(e) => {
                        fails.record(&e);
                        last = Some(e);
                    }
                }
            }
            Err(last.expect("max_attempts >= 1"))
        })
        .collect();
    let mut outcomes = Vec::with_capacity(cfg.reps);
    let mut failures = FailureCounts::default();
    for r in results {
        let (o, f) = r?;
        failures.merge(&f);
        outcomes.push(o);
    }
    Ok(CellResult {
        dgp,
        n,
        outcomes,
        failures,
        bandwidths: cfg.bandwidths.clone(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionRow {
    pub dgp: u8,
    pub n: usize,
    pub test: String,
    pub alpha: f64,
    pub rate: f64,
    /// `√(rate (1 - rate) / R)`.
    pub mc_se: f64,
    pub failures: usize,
}

/// Rejection proportions for every cell, test and significance level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RejectionTable {
    pub rows: Vec<RejectionRow>,
    pub reps: usize,
    pub bootstrap: usize,
    pub seed: u64,
    pub estimator: Estimator,
}

impl RejectionTable {
    pub fn from_cells(cfg: &McConfig, cells: &[CellResult]) -> Self {
        let mut rows = Vec::new();
        for cell in cells {
            for test in cell.tests() {
                for &alpha in &cfg.alphas {
                    let rate = cell.rate(test, alpha);
                    rows.push(RejectionRow {
                        dgp: cell.dgp,
                        n: cell.n,
                        test: cell.label(test),
                        alpha,
                        rate,
                        mc_se: (rate * (1.0 - rate) / cell.reps() as f64).sqrt(),
                        failures: cell.failures.total(),
                    });
                }
            }
        }
        Self {
            rows,
            reps: cfg.reps,
            bootstrap: cfg.bootstrap,
            seed: cfg.seed,
            estimator: cfg.estimator,
        }
    }

    pub fn get(&self, dgp: u8, n: usize, test: &str, alpha: f64) -> Option<&RejectionRow> {
        self.rows
            .iter()
            .find(|r| r.dgp == dgp && r.n == n && r.test == test && (r.alpha - alpha).abs() < 1e-12)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("dgp,n,test,alpha,rate,mc_se,reps,bootstrap,failures,seed\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{},{:.6},{:.6},{},{},{},{}",
                r.dgp,
                r.n,
                r.test,
                r.alpha,
                r.rate,
                r.mc_se,
                self.reps,
                self.bootstrap,
                r.failures,
                self.seed
            );
        }
        out
    }

    /// One markdown table per significance level; rows are `(dgp, n)`,
    /// columns are tests, entries are rejection percentages.
    pub fn to_markdown(&self) -> String {
        let mut alphas: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !alphas.iter().any(|a| (a - r.alpha).abs() < 1e-12) {
                alphas.push(r.alpha);
            }
        }
        let mut out = String::new();
        for alpha in alphas {
            let rows: Vec<&RejectionRow> = self
                .rows
                .iter()
                .filter(|r| (r.alpha - alpha).abs() < 1e-12)
                .collect();
            let mut tests: Vec<&str> = Vec::new();
            let mut cells: Vec<(u8, usize)> = Vec::new();
            for r in &rows {
                if !tests.contains(&r.test.as_str()) {
                    tests.push(&r.test);
                }
                if !cells.contains(&(r.dgp, r.n)) {
                    cells.push((r.dgp, r.n));
                }
            }
            let _ = writeln!(
                out,
                "Rejection rates (%) at alpha = {alpha}; R = {}, B = {}, seed = {}, estimator = {}\n",
                self.reps, self.bootstrap, self.seed, self.estimator
            );
            let _ = writeln!(out, "| DGP | n | {} | failures |", tests.join(" | "));
            let _ = writeln!(out, "|---|---|{}---|", "---:|".repeat(tests.len()));
            for (dgp, n) in cells {
                let mut line = format!("| {dgp} | {n} |");
                let mut failures = 0;
                for t in &tests {
                    match rows
                        .iter()
                        .find(|r| r.dgp == dgp && r.n == n && r.test == *t)
                    {
                        Some(r) => {
                            failures = r.failures;
                            let _ = write!(line, " {:.2} |", 100.0 * r.rate);
                        }
                        None => line.push_str(" |"),
                    }
                }
                let _ = writeln!(out, "{line} {failures} |");
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for RejectionTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_markdown())
    }
}

/// Runs every `(dgp, n)` cell of `cfg` and tabulates rejection rates.
pub fn run_experiment(cfg: &McConfig) -> Result<RejectionTable> {
    cfg.validate()?;
    let mut cells = Vec::new();
    for &dgp in &cfg.dgps {
        for &n in &cfg.sample_sizes {
            cells.push(run_cell(cfg, dgp, n)?);
        }
    }
    Ok(RejectionTable::from_cells(cfg, &cells))
}
