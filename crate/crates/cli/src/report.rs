//! Report types and their JSON / CSV / markdown / text renderings.
//!
//! Numbers are always printed through [`num`], the JSON formatter, so every
//! number in a text or markdown report occurs verbatim in the JSON report.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use projtest_core::kernel_test::{upper_quantile, KernelTestResult};
use projtest_core::{Dataset, Estimator, FittedModel, LinkFamily, TestResult};
use serde::Serialize;

use crate::args::Format;

/// Shortest round-trip representation, as written by `serde_json`.
pub fn num(x: f64) -> String {
    serde_json::to_string(&x).expect("f64 always serializes")
}

fn opt(x: Option<f64>) -> String {
    x.map_or_else(|| "NA".to_string(), num)
}

fn json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("report serializes");
    s.push('\n');
    s
}

#[derive(Debug, Clone, Serialize)]
pub struct DataSummary {
    pub observations: usize,
    pub treated: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: Option<f64>,
    pub z: Option<f64>,
}

/// Five-number summary and mean of the fitted propensities.
#[derive(Debug, Clone, Serialize)]
pub struct Propensity {
    pub min: f64,
    pub q25: f64,
    pub median: f64,
    pub q75: f64,
    pub max: f64,
    pub mean: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ModelSummary {
    pub link: LinkFamily,
    pub estimator: Estimator,
    pub converged: bool,
    pub iterations: usize,
    pub gradient_norm: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub log_likelihood: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rss: Option<f64>,
    pub coefficients: Vec<Coefficient>,
    pub propensity: Propensity,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    pub data: DataSummary,
    pub model: ModelSummary,
}

#[derive(Debug, Clone, Serialize)]
pub struct Decision {
    pub alpha: f64,
    pub critical_value: f64,
    pub reject: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct StatisticRow {
    pub test: String,
    pub statistic: f64,
    pub pval: f64,
    pub decisions: Vec<Decision>,
}

#[derive(Debug, Clone, Serialize)]
pub struct KernelDetail {
    pub test: String,
    pub c: f64,
    pub h: f64,
    pub vhat: f64,
    pub sigma_hat: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct BootstrapInfo {
    pub replicates: usize,
    pub seed: u64,
    pub multipliers: &'static str,
}

#[derive(Debug, Clone, Serialize)]
pub struct TestReport {
    pub data: DataSummary,
    pub model: ModelSummary,
    pub bootstrap: BootstrapInfo,
    /// CvM and KS rows, then one row per kernel bandwidth.
    pub tests: Vec<StatisticRow>,
    pub kernel: Vec<KernelDetail>,
}

fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Inverse information for MLE, sandwich `A⁻¹ B A⁻¹` for NLLS.
fn std_errors(f: &FittedModel) -> Option<Vec<f64>> {
    let k = f.k();
    let mut a = DMatrix::<f64>::zeros(k, k);
    let mut b = DMatrix::<f64>::zeros(k, k);
    for i in 0..f.n() {
        let g = f.grad.row(i).transpose();
        let outer = &g * g.transpose();
        let q = f.qhat[i];
        match f.estimator {
            Estimator::Mle => a += outer / (q * (1.0 - q)),
            Estimator::Nlls => {
                b += &outer * f.resid[i].powi(2);
                a += outer;
            }
        }
    }
    let ainv = a.try_inverse()?;
    let cov = match f.estimator {
        Estimator::Mle => ainv,
        Estimator::Nlls => &ainv * b * &ainv,
    };
    let se: Vec<f64> = cov.diagonal().iter().map(|v| v.sqrt()).collect();
    se.iter().all(|s| s.is_finite()).then_some(se)
}

impl ModelSummary {
    pub fn new(data: &Dataset, f: &FittedModel) -> Self {
        let se = std_errors(f);
        let coefficients = data
            .names()
            .iter()
            .enumerate()
            .map(|(j, name)| {
                let s = se.as_ref().map(|s| s[j]);
                Coefficient {
                    name: name.clone(),
                    estimate: f.theta[j],
                    std_error: s,
                    z: s.map(|s| f.theta[j] / s),
                }
            })
            .collect();
        let mut q: Vec<f64> = f.qhat.iter().copied().collect();
        q.sort_by(f64::total_cmp);
        let propensity = Propensity {
            min: q[0],
            q25: quantile(&q, 0.25),
            median: quantile(&q, 0.5),
            q75: quantile(&q, 0.75),
            max: q[q.len() - 1],
            mean: q.iter().sum::<f64>() / q.len() as f64,
        };
        let (log_likelihood, rss) = match f.estimator {
            Estimator::Mle => (Some(f.objective), None),
            Estimator::Nlls => (None, Some(f.objective)),
        };
        Self {
            link: f.link,
            estimator: f.estimator,
            converged: f.converged,
            iterations: f.iterations,
            gradient_norm: f.gradient_norm,
            log_likelihood,
            rss,
            coefficients,
            propensity,
        }
    }

    fn text(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "model: {} link, {} estimator",
            self.link, self.estimator
        );
        let _ = writeln!(out, "  converged       {}", self.converged);
        let _ = writeln!(out, "  iterations      {}", self.iterations);
        let _ = writeln!(out, "  |score|_inf     {}", num(self.gradient_norm));
        if let Some(ll) = self.log_likelihood {
            let _ = writeln!(out, "  log-likelihood  {}", num(ll));
        }
        if let Some(rss) = self.rss {
            let _ = writeln!(out, "  rss             {}", num(rss));
        }
        let _ = writeln!(out, "\ncoefficients");
        let _ = writeln!(
            out,
            "  {:<16}{:>24}{:>24}{:>24}",
            "term", "estimate", "std_error", "z"
        );
        for c in &self.coefficients {
            let _ = writeln!(
                out,
                "  {:<16}{:>24}{:>24}{:>24}",
                c.name,
                num(c.estimate),
                opt(c.std_error),
                opt(c.z)
            );
        }
        let p = &self.propensity;
        let _ = writeln!(out, "\nfitted propensity");
        for (label, v) in [
            ("min", p.min),
            ("q25", p.q25),
            ("median", p.median),
            ("q75", p.q75),
            ("max", p.max),
            ("mean", p.mean),
        ] {
            let _ = writeln!(out, "  {label:<8}{}", num(v));
        }
    }

    fn markdown(&self, out: &mut String) {
        let _ = writeln!(
            out,
            "| link | estimator | converged | iterations | gradient norm | objective |"
        );
        let _ = writeln!(out, "|---|---|---|---:|---:|---:|");
        let objective = match (self.log_likelihood, self.rss) {
            (Some(ll), _) => format!("log-likelihood {}", num(ll)),
            (None, Some(rss)) => format!("rss {}", num(rss)),
            _ => String::new(),
        };
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} | {} | {objective} |\n",
            self.link,
            self.estimator,
            self.converged,
            self.iterations,
            num(self.gradient_norm)
        );
        let _ = writeln!(out, "| term | estimate | std_error | z |");
        let _ = writeln!(out, "|---|---:|---:|---:|");
        for c in &self.coefficients {
            let _ = writeln!(
                out,
                "| {} | {} | {} | {} |",
                c.name,
                num(c.estimate),
                opt(c.std_error),
                opt(c.z)
            );
        }
        let p = &self.propensity;
        let _ = writeln!(
            out,
            "\n| propensity | min | q25 | median | q75 | max | mean |"
        );
        let _ = writeln!(out, "|---|---:|---:|---:|---:|---:|---:|");
        let _ = writeln!(
            out,
            "| fitted | {} | {} | {} | {} | {} | {} |",
            num(p.min),
            num(p.q25),
            num(p.median),
            num(p.q75),
            num(p.max),
            num(p.mean)
        );
    }

    fn coefficient_csv(&self) -> String {
        let mut out = String::from("term,estimate,std_error,z\n");
        for c in &self.coefficients {
            let _ = writeln!(
                out,
                "{},{},{},{}",
                c.name,
                num(c.estimate),
                opt(c.std_error),
                opt(c.z)
            );
        }
        out
    }
}

impl DataSummary {
    pub fn new(data: &Dataset) -> Self {
        Self {
            observations: data.n(),
            treated: data.treated(),
        }
    }

    fn text(&self, out: &mut String) {
        let _ = writeln!(out, "data");
        let _ = writeln!(out, "  observations    {}", self.observations);
        let _ = writeln!(out, "  treated         {}\n", self.treated);
    }
}

impl FitReport {
    pub fn new(data: &Dataset, fitted: &FittedModel) -> Self {
        Self {
            data: DataSummary::new(data),
            model: ModelSummary::new(data, fitted),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => self.model.coefficient_csv(),
            Format::Markdown => {
                let mut out = format!(
                    "observations: {}, treated: {}\n\n",
                    self.data.observations, self.data.treated
                );
                self.model.markdown(&mut out);
                out
            }
            Format::Text => {
                let mut out = String::new();
                self.data.text(&mut out);
                self.model.text(&mut out);
                out
            }
        }
    }
}

fn decisions(
    alphas: &[f64],
    crit: impl Fn(f64) -> f64,
    reject: impl Fn(f64) -> bool,
) -> Vec<Decision> {
    alphas
        .iter()
        .map(|&alpha| Decision {
            alpha,
            critical_value: crit(alpha),
            reject: reject(alpha),
        })
        .collect()
}

fn kernel_label(c: f64) -> String {
    format!("T({})", num(c))
}

impl TestReport {
    pub fn new(
        data: &Dataset,
        fitted: &FittedModel,
        boot: &TestResult,
        kernel: &[KernelTestResult],
        alphas: &[f64],
    ) -> Self {
        let crit = |alpha: f64| *boot.crit_at(alpha).expect("critical value for every alpha");
        let mut tests = vec![
            StatisticRow {
                test: "CvM".into(),
                statistic: boot.stats.cvm,
                pval: boot.pval_cvm,
                decisions: decisions(alphas, |a| crit(a).cvm, |a| boot.reject_cvm(a)),
            },
            StatisticRow {
                test: "KS".into(),
                statistic: boot.stats.ks,
                pval: boot.pval_ks,
                decisions: decisions(alphas, |a| crit(a).ks, |a| boot.reject_ks(a)),
            },
        ];
        for k in kernel {
            tests.push(StatisticRow {
                test: kernel_label(k.c),
                statistic: k.t,
                pval: k.pval,
                decisions: decisions(alphas, upper_quantile, |a| k.reject(a)),
            });
        }
        Self {
            data: DataSummary::new(data),
            model: ModelSummary::new(data, fitted),
            bootstrap: BootstrapInfo {
                replicates: boot.b,
                seed: boot.seed,
                multipliers: "mammen",
            },
            tests,
            kernel: kernel
                .iter()
                .map(|k| KernelDetail {
                    test: kernel_label(k.c),
                    c: k.c,
                    h: k.h,
                    vhat: k.vhat,
                    sigma_hat: k.sigma_hat,
                })
                .collect(),
        }
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => json(self),
            Format::Csv => {
                let mut out = String::from("test,statistic,pval,alpha,critical_value,reject\n");
                for t in &self.tests {
                    for d in &t.decisions {
                        let _ = writeln!(
                            out,
                            "{},{},{},{},{},{}",
                            t.test,
                            num(t.statistic),
                            num(t.pval),
                            num(d.alpha),
                            num(d.critical_value),
                            d.reject
                        );
                    }
                }
                out
            }
            Format::Markdown => {
                let mut out = format!(
                    "observations: {}, treated: {}\n\n",
                    self.data.observations, self.data.treated
                );
                self.model.markdown(&mut out);
                let _ = writeln!(
                    out,
                    "\nbootstrap: {} {} multiplier replicates, seed {}\n",
                    self.bootstrap.replicates, self.bootstrap.multipliers, self.bootstrap.seed
                );
                let _ = writeln!(
                    out,
                    "| test | statistic | p-value | alpha | critical value | reject |"
                );
                let _ = writeln!(out, "|---|---:|---:|---:|---:|---|");
                for t in &self.tests {
                    for d in &t.decisions {
                        let _ = writeln!(
                            out,
                            "| {} | {} | {} | {} | {} | {} |",
                            t.test,
                            num(t.statistic),
                            num(t.pval),
                            num(d.alpha),
                            num(d.critical_value),
                            d.reject
                        );
                    }
                }
                if !self.kernel.is_empty() {
                    let _ = writeln!(out, "\n| kernel test | c | h | vhat | sigma_hat |");
                    let _ = writeln!(out, "|---|---:|---:|---:|---:|");
                    for k in &self.kernel {
                        let _ = writeln!(
                            out,
                            "| {} | {} | {} | {} | {} |",
                            k.test,
                            num(k.c),
                            num(k.h),
                            num(k.vhat),
                            num(k.sigma_hat)
                        );
                    }
                }
                out
            }
            Format::Text => {
                let mut out = String::new();
                self.data.text(&mut out);
                self.model.text(&mut out);
                let _ = writeln!(
                    out,
                    "\nbootstrap: {} {} multiplier replicates, seed {}",
                    self.bootstrap.replicates, self.bootstrap.multipliers, self.bootstrap.seed
                );
                let _ = writeln!(
                    out,
                    "\n  {:<10}{:>24}{:>24}{:>8}{:>24}  reject",
                    "test", "statistic", "p-value", "alpha", "critical value"
                );
                for t in &self.tests {
                    for d in &t.decisions {
                        let _ = writeln!(
                            out,
                            "  {:<10}{:>24}{:>24}{:>8}{:>24}  {}",
                            t.test,
                            num(t.statistic),
                            num(t.pval),
                            num(d.alpha),
                            num(d.critical_value),
                            if d.reject { "yes" } else { "no" }
                        );
                    }
                }
                if !self.kernel.is_empty() {
                    let _ = writeln!(out, "\nkernel test bandwidths");
                    for k in &self.kernel {
                        let _ = writeln!(
                            out,
                            "  {:<10}c {}  h {}  vhat {}  sigma_hat {}",
                            k.test,
                            num(k.c),
                            num(k.h),
                            num(k.vhat),
                            num(k.sigma_hat)
                        );
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantile_interpolates() {
        let v = [1.0, 2.0, 3.0, 4.0, 5.0];
        assert_eq!(quantile(&v, 0.5), 3.0);
        assert_eq!(quantile(&v, 0.25), 2.0);
        assert_eq!(quantile(&[1.0, 2.0], 0.5), 1.5);
    }

    #[test]
    fn num_matches_json() {
        for x in [0.1, 1.0, -2.5e-9, 123456.789] {
            assert_eq!(num(x), serde_json::Value::from(x).to_string());
        }
        assert_eq!(num(f64::NAN), "null");
    }
}
