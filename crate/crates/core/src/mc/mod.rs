//! Simulation designs and the Monte Carlo runner.

mod dgp;
mod ecdf;
mod experiment;

pub use dgp::{generate, generate_draw, DgpDraw, DgpSpec};
pub use ecdf::{ecdf_comparison, EcdfRow, EcdfTable};
pub use experiment::{
    run_cell, run_experiment, CellResult, FailureCounts, McConfig, RejectionRow, RejectionTable,
    ReplicationOutcome, TestLabel,
};
