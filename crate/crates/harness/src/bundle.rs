//! Replica runs, aggregate statistics and the on-disk result bundle.
//!
//! The hashed payload is the canonical JSON of [`ResultBundle`]; wall-clock
//! timestamps live only in `metadata.json`, outside the hash.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use torpid_core::glauber::{self, Trajectory, GENERATOR_NAME};
use torpid_core::Torus;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::suites::SuiteReport;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Metadata {
    pub config: ExperimentConfig,
    pub code_version: String,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReplicaResult {
    pub dim: usize,
    pub replica: u64,
    pub seed: u64,
    pub stream: u64,
    pub trajectory: Trajectory,
}

/// Non-escaping replicas are counted in `censored`, never imputed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Aggregate {
    pub dim: usize,
    pub vertices: usize,
    pub replicas: u64,
    pub budget: u64,
    pub escaped: u64,
    pub censored: u64,
    pub escape_fraction: f64,
    /// Median with censored replicas ranked last; `None` when at least half
    /// of the replicas are censored.
    pub median_escape_step: Option<u64>,
    pub balanced_fraction_mean: f64,
    /// Recorded imbalance samples, keyed by imbalance.
    pub imbalance_histogram: BTreeMap<i64, u64>,
}

impl Aggregate {
    pub fn of(dim: usize, vertices: usize, budget: u64, runs: &[&ReplicaResult]) -> Aggregate {
        let mut steps: Vec<Option<u64>> = runs.iter().map(|r| r.trajectory.escape_step).collect();
        steps.sort_by_key(|s| s.unwrap_or(u64::MAX));
        let escaped = steps.iter().filter(|s| s.is_some()).count() as u64;
        let n = runs.len() as u64;
        let mut histogram = BTreeMap::new();
        for r in runs {
            for &m in &r.trajectory.imbalances {
                *histogram.entry(m).or_insert(0) += 1;
            }
        }
        let median = if n == 0 { None } else { steps[(n as usize - 1) / 2] };
        Aggregate {
            dim,
            vertices,
            replicas: n,
            budget,
            escaped,
            censored: n - escaped,
            escape_fraction: escaped as f64 / n.max(1) as f64,
            median_escape_step: median,
            balanced_fraction_mean: runs.iter().map(|r| r.trajectory.balanced_fraction()).sum::<f64>() / n.max(1) as f64,
            imbalance_histogram: histogram,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultBundle {
    pub metadata: Metadata,
    pub replicas: Vec<ReplicaResult>,
    pub aggregates: Vec<Aggregate>,
    pub verification: Vec<SuiteReport>,
}

impl ResultBundle {
    pub fn payload(&self) -> Vec<u8> {
        serde_json::to_vec(self).expect("bundle serializes")
    }

    pub fn payload_hash(&self) -> String {
        hex::encode(Sha256::digest(self.payload()))
    }
}

/// Runs every `(d, replica)` pair on the current rayon pool; results come
/// back in `(d, replica)` order regardless of scheduling.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ResultBundle, CliError> {
    config.validate()?;
    let tasks: Vec<(usize, u64)> = config
        .dims
        .iter()
        .flat_map(|&d| (0..config.replicas).map(move |k| (d, k)))
        .collect();
    let replicas: Vec<ReplicaResult> = tasks
        .par_iter()
        .map(|&(d, k)| {
            let torus = Torus::new(config.side, d)?;
            let spec = config.chain_spec(d, k);
            let trajectory = glauber::run(&config.start_state(&torus, k), &spec)?;
            Ok(ReplicaResult {
                dim: d,
                replica: k,
                seed: spec.seed,
                stream: spec.stream,
                trajectory,
            })
        })
        .collect::<Result<_, CliError>>()?;
    let aggregates = config
        .dims
        .iter()
        .map(|&d| {
            let runs: Vec<&ReplicaResult> = replicas.iter().filter(|r| r.dim == d).collect();
            Aggregate::of(d, config.side.pow(d as u32), config.steps, &runs)
        })
        .collect();
    Ok(ResultBundle {
        metadata: Metadata {
            config: config.clone(),
            code_version: env!("CARGO_PKG_VERSION").to_string(),
            generator: GENERATOR_NAME.to_string(),
        },
        replicas,
        aggregates,
        verification: Vec::new(),
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Written {
    pub payload_sha256: String,
    pub files: Vec<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct TrajectoryRow<'a> {
    step: u64,
    imbalance: i64,
    phase: &'a str,
}

pub fn trajectory_file_name(side: usize, r: &ReplicaResult) -> String {
    format!("L{side}_d{}_r{}.csv", r.dim, r.replica)
}

/// `step,imbalance,phase` for every recorded sample.
pub fn write_trajectory_csv<W: Write>(t: &Trajectory, w: W) -> Result<(), CliError> {
    let mut out = csv::Writer::from_writer(w);
    for (i, (&m, p)) in t.imbalances.iter().zip(&t.phase_tags).enumerate() {
        out.serialize(TrajectoryRow {
            step: i as u64 * t.sample_stride,
            imbalance: m,
            phase: p.as_str(),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// `(step, imbalance, phase)` rows back from a trajectory CSV.
pub fn read_trajectory_csv(path: &Path) -> Result<Vec<(u64, i64, String)>, CliError> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize::<(u64, i64, String)>()
        .map(|row| row.map_err(CliError::from))
        .collect()
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Writes `bundle.json` (the hashed payload), `metadata.json`,
/// `aggregate.json` and one CSV per replica under `trajectories/`.
/// Called from a single thread; nothing else writes into `dir`.
pub fn write_bundle(bundle: &ResultBundle, dir: &Path) -> Result<Written, CliError> {
    fs::create_dir_all(dir.join("trajectories"))?;
    let hash = bundle.payload_hash();
    let mut files = Vec::new();

    let path = dir.join("bundle.json");
    fs::write(&path, bundle.payload())?;
    files.push(path);

    let created = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    let path = dir.join("metadata.json");
    write_json(
        &path,
        &serde_json::json!({
            "metadata": bundle.metadata,
            "payload_sha256": hash,
            "created_unix": created,
        }),
    )?;
    files.push(path);

    let path = dir.join("aggregate.json");
    write_json(
        &path,
        &serde_json::json!({
            "aggregates": bundle.aggregates,
            "verification": bundle.verification,
            "payload_sha256": hash,
        }),
    )?;
    files.push(path);

    for r in &bundle.replicas {
        let path = dir.join("trajectories").join(trajectory_file_name(bundle.metadata.config.side, r));
        write_trajectory_csv(&r.trajectory, BufWriter::new(File::create(&path)?))?;
        files.push(path);
    }
    Ok(Written {
        payload_sha256: hash,
        files,
    })
}

pub fn read_bundle(path: &Path) -> Result<ResultBundle, CliError> {
    let bytes = fs::read(path)?;
    Ok(serde_json::from_slice(&bytes)?)
}
