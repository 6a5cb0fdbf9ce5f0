//! The CLI subcommands as library functions returning a JSON summary.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Value};
use torpid_core::cutset;
use torpid_core::exactgibbs::{
    enumerate, exact_kernel, stationary_measure, transfer_matrix_count, write_enumeration, write_kernel_triplets,
    ExactKernel,
};
use torpid_core::glauber::{ChainKind, ChainSpec};
use torpid_core::{Coloring, Rho, Torus};

use crate::bundle::{run_experiment, write_bundle, ResultBundle};
use crate::config::{ExperimentConfig, Start, SCHEMA_VERSION};
use crate::error::CliError;
use crate::suites::{conductance_check, instance_name, run_suites, Suite, SuiteReport, VerifyOptions};

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

#[derive(Debug, Clone)]
pub struct EnumerateArgs {
    pub side: usize,
    pub dim: usize,
    pub rho: Rho,
    pub chain: ChainKind,
    pub state_budget: u64,
    pub kernel_budget: usize,
    pub out: Option<PathBuf>,
}

fn kernel_summary(kernel: &ExactKernel) -> Value {
    json!({
        "states": kernel.len(),
        "nonzeros": (0..kernel.len()).map(|i| kernel.row(i).len()).sum::<usize>(),
        "symmetric": kernel.is_symmetric(),
        "doubly_stochastic": kernel.is_doubly_stochastic(),
        "max_row_sum_error": kernel.max_row_sum_error(),
    })
}

/// Enumeration dump, class measures, the exact kernel when it fits, its
/// mixing time and the conductance bound.
pub fn enumerate_cmd(args: &EnumerateArgs) -> Result<Value, CliError> {
    let torus = Torus::new(args.side, args.dim)?;
    let idx = enumerate(&torus, args.state_budget)?;
    let transfer = match transfer_matrix_count(&torus) {
        Ok(c) => json!(c.to_string()),
        Err(e) => json!({ "skipped": e.to_string() }),
    };
    let measure = stationary_measure(&idx, args.rho);
    let mut kernel_json = json!({ "skipped": format!("{} states exceed the kernel budget {}", idx.len(), args.kernel_budget) });
    let mut bound_json = Value::Null;
    let mut kernel = None;
    if idx.len() <= args.kernel_budget {
        let spec = ChainSpec {
            kind: args.chain,
            ..ChainSpec::metropolis(args.rho, 0, 0)
        };
        let k = exact_kernel(&idx, &spec, args.kernel_budget)?;
        kernel_json = kernel_summary(&k);
        bound_json = match conductance_check(&idx, &k, args.rho) {
            Ok(c) => serde_json::to_value(c)?,
            Err(e) => json!({ "error": e.to_json() }),
        };
        kernel = Some(k);
    }
    let report = json!({
        "instance": instance_name(&torus),
        "L": args.side,
        "d": args.dim,
        "rho": args.rho,
        "chain": args.chain.name(),
        "states": idx.len(),
        "transfer_matrix_count": transfer,
        "measure": measure,
        "kernel": kernel_json,
        "conductance": bound_json,
    });
    if let Some(dir) = &args.out {
        fs::create_dir_all(dir)?;
        write_enumeration(&idx, BufWriter::new(File::create(dir.join("enumeration.jsonl"))?))?;
        write_json(&dir.join("measures.json"), &measure)?;
        if let Some(k) = &kernel {
            write_kernel_triplets(k, BufWriter::new(File::create(dir.join("kernel.tsv"))?))?;
        }
        write_json(&dir.join("report.json"), &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct SimulateArgs {
    pub side: usize,
    pub dim: usize,
    pub rho: Rho,
    pub chain: ChainKind,
    pub steps: u64,
    pub stride: u64,
    pub seed: u64,
    pub replicas: u64,
    pub start: Start,
    pub out: PathBuf,
}

fn bundle_summary(bundle: &ResultBundle, out: &Path) -> Result<Value, CliError> {
    let written = write_bundle(bundle, out)?;
    Ok(json!({
        "payload_sha256": written.payload_sha256,
        "out": out,
        "files": written.files.len(),
        "aggregates": bundle.aggregates,
    }))
}

pub fn simulate_cmd(args: &SimulateArgs) -> Result<Value, CliError> {
    let config = ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        side: args.side,
        dims: vec![args.dim],
        rho: args.rho,
        chain: args.chain,
        replicas: args.replicas,
        steps: args.steps,
        stride: args.stride,
        seed_root: args.seed,
        start: args.start,
    };
    let bundle = run_experiment(&config)?;
    bundle_summary(&bundle, &args.out)
}

#[derive(Debug, Clone)]
pub struct EscapeArgs {
    pub side: usize,
    pub dims: Vec<usize>,
    pub rho: Rho,
    pub chain: ChainKind,
    pub budget: u64,
    pub replicas: u64,
    pub seed: u64,
    /// Defaults to `max(budget / 1000, 1)`.
    pub stride: Option<u64>,
    pub out: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EscapeRow {
    pub d: usize,
    pub vertices: usize,
    pub replicas: u64,
    pub budget: u64,
    pub escaped: u64,
    pub censored: u64,
    /// Empty when at least half of the replicas are censored.
    pub median_escape_step: Option<u64>,
    pub escape_fraction: f64,
    pub balanced_fraction: f64,
}

pub fn escape_config(args: &EscapeArgs) -> ExperimentConfig {
    ExperimentConfig {
        schema_version: SCHEMA_VERSION,
        side: args.side,
        dims: args.dims.clone(),
        rho: args.rho,
        chain: args.chain,
        replicas: args.replicas,
        steps: args.budget,
        stride: args.stride.unwrap_or((args.budget / 1000).max(1)),
        seed_root: args.seed,
        start: Start::Even,
    }
}

pub fn escape_rows(bundle: &ResultBundle) -> Vec<EscapeRow> {
    bundle
        .aggregates
        .iter()
        .map(|a| EscapeRow {
            d: a.dim,
            vertices: a.vertices,
            replicas: a.replicas,
            budget: a.budget,
            escaped: a.escaped,
            censored: a.censored,
            median_escape_step: a.median_escape_step,
            escape_fraction: a.escape_fraction,
            balanced_fraction: a.balanced_fraction_mean,
        })
        .collect()
}

/// Replicas start at the even ground state; the table has one row per `d`.
pub fn escape_cmd(args: &EscapeArgs) -> Result<Value, CliError> {
    let bundle = run_experiment(&escape_config(args))?;
    let mut summary = bundle_summary(&bundle, &args.out)?;
    let rows = escape_rows(&bundle);
    let mut w = csv::Writer::from_path(args.out.join("escape_table.csv"))?;
    for r in &rows {
        w.serialize(r)?;
    }
    w.flush()?;
    summary["table"] = serde_json::to_value(&rows)?;
    Ok(summary)
}

/// Extraction and selection report for a coloring file.
pub fn cutsets_cmd(input: &Path, out: Option<&Path>) -> Result<Value, CliError> {
    let chi = Coloring::read(input)?;
    let report = serde_json::to_value(cutset::report(&chi))?;
    if let Some(path) = out {
        write_json(path, &report)?;
    }
    Ok(report)
}

#[derive(Debug, Clone)]
pub struct VerifyArgs {
    pub side: usize,
    pub dim: usize,
    pub suites: Vec<Suite>,
    pub opts: VerifyOptions,
    pub out: Option<PathBuf>,
}

/// All suites run to completion and are written out before the first hard
/// failure is turned into an error.
pub fn verify_cmd(args: &VerifyArgs) -> Result<Value, CliError> {
    let torus = Torus::new(args.side, args.dim)?;
    let reports = run_suites(&torus, &args.suites, &args.opts)?;
    if let Some(dir) = &args.out {
        write_json(&dir.join("verify.json"), &reports)?;
    }
    let summary = json!({ "instance": instance_name(&torus), "reports": reports });
    reports.into_iter().try_for_each(|r: SuiteReport| r.into_result().map(drop))?;
    Ok(summary)
}

/// Re-runs the configuration embedded in a bundle and compares payload hashes.
pub fn replay_cmd(bundle_path: &Path) -> Result<Value, CliError> {
    let stored = crate::bundle::read_bundle(bundle_path)?;
    let fresh = run_experiment(&stored.metadata.config)?;
    let (a, b) = (stored.payload_hash(), fresh.payload_hash());
    if a != b {
        return Err(CliError::VerifyFailed {
            suite: "replay".into(),
            message: "replayed payload differs from the stored bundle".into(),
            witness: json!({ "stored": a, "replayed": b }),
        });
    }
    Ok(json!({ "payload_sha256": a, "replayed": true }))
}
