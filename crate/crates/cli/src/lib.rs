//! Command-line front end: CSV ingestion, model fitting and testing on user
//! data, Monte Carlo experiments and ECDF plot data.
//!
//! Exit codes: 0 success, 3 invalid input, 4 no convergence, 5 singular
//! design, 6 degenerate variance or draw, 1 anything else (e.g. I/O).

#![allow(clippy::neg_cmp_op_on_partial_ord)]

use std::io::Write as _;
use std::path::PathBuf;

use projtest_core::bootstrap::run_bootstrap_with_alphas;
use projtest_core::kernel_test::t_tests;
use projtest_core::mc::{ecdf_comparison, run_experiment, EcdfTable, McConfig};
use projtest_core::projection::projected_process;
use projtest_core::{fit, Dataset, Error, FittedModel, DEFAULT_ALPHAS};

pub mod args;
pub mod config;
pub mod input;
pub mod report;

pub use args::{Cli, Command, Format};
use args::{DataArgs, OutputArgs, SimulateArgs, TestArgs};
use report::{num, FitReport, TestReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error(transparent)]
    Core(#[from] Error),
    #[error("cannot write {}: {source}", path.display())]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Core(Error::InvalidInput(_)) => 3,
            CliError::Core(Error::NoConvergence { .. }) => 4,
            CliError::Core(Error::SingularDesign { .. }) => 5,
            CliError::Core(Error::DegenerateVariance | Error::DegenerateDraw { .. }) => 6,
            CliError::Write { .. } => 1,
        }
    }
}

fn invalid(msg: String) -> Error {
    Error::InvalidInput(msg)
}

fn check_alphas(alphas: &[f64]) -> Result<(), Error> {
    if alphas.is_empty() {
        return Err(invalid("need at least one alpha".into()));
    }
    match alphas.iter().find(|a| !(**a > 0.0 && **a < 1.0)) {
        Some(a) => Err(invalid(format!("alpha {a} outside (0, 1)"))),
        None => Ok(()),
    }
}

fn load_and_fit(a: &DataArgs) -> Result<(Dataset, FittedModel), Error> {
    let data = input::load_dataset(
        &a.input,
        &a.treatment,
        a.covariates.as_deref(),
        !a.no_intercept,
    )?;
    let fitted = fit(&data, a.link, a.estimator)?;
    Ok((data, fitted))
}

fn cmd_test(a: &TestArgs) -> Result<TestReport, Error> {
    if a.bootstrap < 1 {
        return Err(invalid("--bootstrap must be at least 1".into()));
    }
    check_alphas(&a.alpha)?;
    if let Some(c) = a.shaikh_c.iter().find(|c| !(**c > 0.0)) {
        return Err(invalid(format!("--shaikh-c value {c} must be positive")));
    }
    let (data, fitted) = load_and_fit(&a.data)?;
    let proc = projected_process(&fitted)?;
    let boot = run_bootstrap_with_alphas(&fitted, &proc, a.bootstrap, a.seed, &a.alpha);
    let kernel = if a.shaikh_c.is_empty() {
        Vec::new()
    } else {
        t_tests(&fitted, &a.shaikh_c)?
    };
    Ok(TestReport::new(&data, &fitted, &boot, &kernel, &a.alpha))
}

/// Defaults, then `--config`, then individual flags.
pub fn simulate_config(a: &SimulateArgs) -> Result<McConfig, Error> {
    let mut cfg = McConfig {
        alphas: DEFAULT_ALPHAS.to_vec(),
        ..McConfig::default()
    };
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path)
            .map_err(|e| invalid(format!("cannot read {}: {e}", path.display())))?;
        cfg = config::parse_config(&text, cfg)?;
    }
    if let Some(v) = &a.dgp {
        cfg.dgps = v.clone();
    }
    if let Some(v) = &a.n {
        cfg.sample_sizes = v.clone();
    }
    if let Some(v) = &a.alpha {
        cfg.alphas = v.clone();
    }
    if let Some(v) = &a.shaikh_c {
        cfg.bandwidths = v.clone();
    }
    cfg.reps = a.reps.unwrap_or(cfg.reps);
    cfg.bootstrap = a.bootstrap.unwrap_or(cfg.bootstrap);
    cfg.seed = a.seed.unwrap_or(cfg.seed);
    cfg.estimator = a.estimator.unwrap_or(cfg.estimator);
    cfg.max_attempts = a.max_attempts.unwrap_or(cfg.max_attempts);
    cfg.validate()?;
    Ok(cfg)
}

fn ecdf_markdown(t: &EcdfTable) -> String {
    let mut out = format!(
        "ECDF of fitted propensities, n = {}, seed = {}\n\n",
        t.n, t.seed
    );
    out.push_str("| u | ecdf_misspecified | ecdf_correct |\n|---:|---:|---:|\n");
    for r in &t.rows {
        out.push_str(&format!(
            "| {} | {} | {} |\n",
            num(r.u),
            num(r.ecdf_misspecified),
            num(r.ecdf_correct)
        ));
    }
    out
}

/// Runs the command and returns the report it would write.
pub fn render(command: &Command) -> Result<String, Error> {
    Ok(match command {
        Command::Fit(a) => {
            let (data, fitted) = load_and_fit(&a.data)?;
            FitReport::new(&data, &fitted).render(a.out.format)
        }
        Command::Test(a) => cmd_test(a)?.render(a.out.format),
        Command::Simulate(a) => {
            let table = run_experiment(&simulate_config(a)?)?;
            match a.out.format {
                Format::Json => {
                    serde_json::to_string_pretty(&table).expect("table serializes") + "\n"
                }
                Format::Csv => table.to_csv(),
                Format::Markdown | Format::Text => table.to_markdown(),
            }
        }
        Command::Ecdf(a) => {
            let table = ecdf_comparison(a.n, a.seed)?;
            match a.out.format {
                Format::Json => {
                    serde_json::to_string_pretty(&table).expect("table serializes") + "\n"
                }
                Format::Csv | Format::Text => table.to_csv(),
                Format::Markdown => ecdf_markdown(&table),
            }
        }
    })
}

fn output_args(command: &Command) -> &OutputArgs {
    match command {
        Command::Fit(a) => &a.out,
        Command::Test(a) => &a.out,
        Command::Simulate(a) => &a.out,
        Command::Ecdf(a) => &a.out,
    }
}

/// Renders the report and writes it to `--output` or stdout.
pub fn execute(cli: &Cli) -> Result<(), CliError> {
    let text = render(&cli.command)?;
    match &output_args(&cli.command).output {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Write {
            path: path.clone(),
            source,
        }),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|source| CliError::Write {
                path: PathBuf::from("<stdout>"),
                source,
            }),
    }
}
