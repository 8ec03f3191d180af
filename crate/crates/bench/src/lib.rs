//! Shared fixtures for the benchmarks.

use projtest_core::mc::{generate, DgpSpec};
use projtest_core::seed::stream_rng;
use projtest_core::{fit_mle, Dataset, FittedModel, LinkFamily};

/// One draw of design `dgp` at size `n`, seeded for repeatability.
pub fn sample(dgp: u8, n: usize) -> Dataset {
    generate(
        &DgpSpec::new(dgp, n).expect("valid design"),
        &mut stream_rng(2024, u64::from(dgp)),
    )
    .expect("non-degenerate draw")
}

pub fn fitted(dgp: u8, n: usize) -> FittedModel {
    fit_mle(&sample(dgp, n), LinkFamily::Probit).expect("fit converges")
}
