//! Experiment plumbing for `torpid-core`: configuration, parallel replica
//! runs, result bundles with a reproducible payload hash, and the
//! verification suites behind `torpid verify`.

pub mod bundle;
pub mod commands;
pub mod config;
pub mod error;
pub mod suites;

pub use bundle::{run_experiment, write_bundle, ResultBundle};
pub use config::{ExperimentConfig, Start};
pub use error::CliError;
pub use suites::{run_suites, Suite, SuiteReport, VerifyOptions};

/// Sizes the global rayon pool from `TORPID_WORKERS` when set.
pub fn init_workers() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("TORPID_WORKERS") else {
        return Ok(());
    };
    let n: usize = raw
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::InvalidParams(format!("TORPID_WORKERS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::InvalidParams(e.to_string()))
}
