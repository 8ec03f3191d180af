use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use projtest_core::{Estimator, LinkFamily};

#[derive(Debug, Parser)]
#[command(
    name = "projtest",
    version,
    about = "Specification tests for parametric propensity-score models"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit the propensity-score model and report coefficients.
    Fit(FitArgs),
    /// Fit the model and run the CvM/KS projection tests, optionally the kernel test.
    Test(TestArgs),
    /// Run a Monte Carlo experiment on the simulated designs.
    Simulate(SimulateArgs),
    /// Emit ECDF plot data for a misspecified and a correctly specified probit.
    Ecdf(EcdfArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Markdown,
    Text,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Write to this file instead of stdout.
    #[arg(long)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// CSV file with a header row.
    #[arg(long)]
    pub input: PathBuf,
    /// Name of the 0/1 treatment column.
    #[arg(long)]
    pub treatment: String,
    /// Comma-separated covariate columns. Default: every other column.
    #[arg(long, value_delimiter = ',')]
    pub covariates: Option<Vec<String>>,
    #[arg(long, default_value = "probit")]
    pub link: LinkFamily,
    #[arg(long, default_value = "mle")]
    pub estimator: Estimator,
    /// Do not prepend a column of ones.
    #[arg(long)]
    pub no_intercept: bool,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct TestArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Bootstrap replicates.
    #[arg(long, default_value_t = 999)]
    pub bootstrap: usize,
    #[arg(long, value_delimiter = ',', default_value = "0.01,0.05,0.10")]
    pub alpha: Vec<f64>,
    /// Bandwidth constants c for the kernel test, h = c n^(-1/8).
    #[arg(long, value_delimiter = ',')]
    pub shaikh_c: Vec<f64>,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}

/// Flags override values read from `--config`.
#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Flat `key = value` file; see the README for keys.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Design ids 1..=10.
    #[arg(long, value_delimiter = ',')]
    pub dgp: Option<Vec<u8>>,
    /// Sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n: Option<Vec<usize>>,
    /// Replications per cell.
    #[arg(long)]
    pub reps: Option<usize>,
    #[arg(long)]
    pub bootstrap: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    pub alpha: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    pub shaikh_c: Option<Vec<f64>>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub estimator: Option<Estimator>,
    #[arg(long)]
    pub max_attempts: Option<usize>,
    #[command(flatten)]
    pub out: OutputArgs,
}

#[derive(Debug, Args)]
pub struct EcdfArgs {
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArgs,
}
