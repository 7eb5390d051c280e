//! Experiment harness behind the `ddroc` binary: configuration files, batch
//! runs over several `c` values plus the nominal baseline, and table output.

pub mod config;
pub mod experiment;
pub mod report;

pub use config::{DistributionSpec, ExperimentConfig, GraphSource};
pub use experiment::{
    derive_seed, evaluate_policy, run_experiment, summarize, Method, ResultBundle, RunResult, StatsSpec,
    SummaryRow,
};
pub use report::{emit_table, parse_csv_table, write_table, Table, TableFormat};

use crate::error::Error;

/// Process exit code for an error: 2 for solver failures, 1 otherwise.
pub fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Solver(_) | Error::Infeasible { .. } | Error::NonFiniteObjective => 2,
        _ => 1,
    }
}
