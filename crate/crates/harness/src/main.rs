use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::Value;
use torpid_core::exactgibbs::{DEFAULT_KERNEL_BUDGET, DEFAULT_STATE_BUDGET};
use torpid_core::Rho;
use torpid_harness::commands::{self, EnumerateArgs, EscapeArgs, SimulateArgs, VerifyArgs};
use torpid_harness::config::{parse_chain, parse_count, parse_dims, Start};
use torpid_harness::suites::parse_suites;
use torpid_harness::{init_workers, CliError, VerifyOptions};

/// Proper 3-colorings of the discrete torus: exact enumeration, Markov
/// chain simulation and structural verification.
///
/// Exit codes: 0 success, 1 hard verification failure, 2 invalid
/// parameters, 3 budget exceeded, 4 i/o. Errors are printed to stderr as
/// JSON. `TORPID_WORKERS` sets the worker pool size.
#[derive(Parser)]
#[command(name = "torpid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Enumerate all colorings and report class measures, the exact kernel,
    /// its mixing time and the conductance bound.
    Enumerate {
        #[arg(long = "L")]
        side: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "0.22")]
        rho: String,
        #[arg(long, default_value = "metropolis")]
        chain: String,
        #[arg(long, default_value_t = DEFAULT_STATE_BUDGET.to_string())]
        budget: String,
        #[arg(long, default_value_t = DEFAULT_KERNEL_BUDGET)]
        kernel_budget: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run replicas of a chain and write trajectories plus aggregates.
    Simulate {
        #[arg(long = "L")]
        side: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "0.22")]
        rho: String,
        #[arg(long, default_value = "metropolis")]
        chain: String,
        #[arg(long)]
        steps: String,
        #[arg(long, default_value = "1")]
        stride: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1)]
        replicas: u64,
        #[arg(long, default_value = "even")]
        start: String,
        #[arg(long, default_value = "runs/simulate")]
        out: PathBuf,
    },
    /// Dump cutset extraction and selection for a coloring file.
    Cutsets {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run verification suites: cutset, shift, flow, reconstruct, bounds, kernel.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long = "L")]
        side: usize,
        #[arg(long)]
        d: usize,
        #[arg(long, default_value = "0.22")]
        rho: String,
        #[arg(long, default_value_t = 100)]
        samples: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        random_pairs: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Escape times from the even ground state across dimensions.
    Escape {
        #[arg(long = "L")]
        side: usize,
        #[arg(long)]
        dims: String,
        #[arg(long, default_value = "0.22")]
        rho: String,
        #[arg(long, default_value = "metropolis")]
        chain: String,
        #[arg(long)]
        budget: String,
        #[arg(long, default_value_t = 16)]
        replicas: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        stride: Option<String>,
        #[arg(long, default_value = "runs/escape")]
        out: PathBuf,
    },
    /// Re-run the configuration stored in a bundle and compare payload hashes.
    Replay {
        #[arg(long)]
        bundle: PathBuf,
    },
}

fn rho(s: &str) -> Result<Rho, CliError> {
    Ok(s.parse::<Rho>()?)
}

fn dispatch(command: Command) -> Result<Value, CliError> {
    match command {
        Command::Enumerate { side, d, rho: r, chain, budget, kernel_budget, out } => commands::enumerate_cmd(&EnumerateArgs {
            side,
            dim: d,
            rho: rho(&r)?,
            chain: parse_chain(&chain)?,
            state_budget: parse_count(&budget)?,
            kernel_budget,
            out,
        }),
        Command::Simulate { side, d, rho: r, chain, steps, stride, seed, replicas, start, out } => {
            commands::simulate_cmd(&SimulateArgs {
                side,
                dim: d,
                rho: rho(&r)?,
                chain: parse_chain(&chain)?,
                steps: parse_count(&steps)?,
                stride: parse_count(&stride)?,
                seed,
                replicas,
                start: start.parse::<Start>()?,
                out,
            })
        }
        Command::Cutsets { input, out } => commands::cutsets_cmd(&input, out.as_deref()),
        Command::Verify { suite, side, d, rho: r, samples, seed, random_pairs, out } => {
            let suites = parse_suites(&suite)?;
            let opts = VerifyOptions {
                rho: rho(&r)?,
                samples,
                seed,
                random_pairs,
                ..VerifyOptions::default()
            };
            commands::verify_cmd(&VerifyArgs { side, dim: d, suites, opts, out })
        }
        Command::Escape { side, dims, rho: r, chain, budget, replicas, seed, stride, out } => commands::escape_cmd(&EscapeArgs {
            side,
            dims: parse_dims(&dims)?,
            rho: rho(&r)?,
            chain: parse_chain(&chain)?,
            budget: parse_count(&budget)?,
            replicas,
            seed,
            stride: stride.as_deref().map(parse_count).transpose()?,
            out,
        }),
        Command::Replay { bundle } => commands::replay_cmd(&bundle),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let err = CliError::InvalidParams(e.to_string());
            eprintln!("{}", err.to_json());
            return ExitCode::from(err.exit_code() as u8);
        }
        Err(e) => {
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    let result = init_workers().and_then(|()| dispatch(cli.command));
    match result {
        Ok(summary) => {
            println!("{}", serde_json::to_string_pretty(&summary).expect("summary serializes"));
            ExitCode::SUCCESS
        }
        Err(err) => {
            eprintln!("{}", err.to_json());
            ExitCode::from(err.exit_code() as u8)
        }
    }
}
