//! `qvar`: compile, simulate and compare qubit placement and routing policies
//! on calibrated devices.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use qvar_core::device::synthetic::REFERENCE_SEED;
use qvar_core::ErrorCategory;

use config::{CliError, ExperimentArgs, Format, Resolved};

#[derive(Parser)]
#[command(name = "qvar", version, about = "Variation-aware qubit placement, routing and reliability estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compile a circuit; writes physical QASM plus a JSON sidecar report.
    Compile(ExperimentArgs),
    /// Compile, then estimate PST and MIBF analytically and by Monte Carlo.
    Simulate(ExperimentArgs),
    /// Recompile for every day of a series under the baseline and VQM routers.
    Sweep(ExperimentArgs),
    /// Compare two concurrent copies against a single copy.
    Partition(ExperimentArgs),
    /// Summary statistics and histograms of calibration data.
    Stats(ExperimentArgs),
    /// Write the bundled synthetic snapshots, series and benchmarks.
    Generate {
        #[arg(long, default_value = "data")]
        out: PathBuf,
        #[arg(long, default_value_t = REFERENCE_SEED)]
        seed: u64,
    },
}

fn exit_code(category: ErrorCategory) -> u8 {
    match category {
        ErrorCategory::Io => 1,
        ErrorCategory::Parse => 3,
        ErrorCategory::Validation => 4,
        ErrorCategory::Capacity => 5,
        ErrorCategory::Guard => 6,
    }
}

fn classify(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<qvar_core::Error>() {
            return exit_code(e.category());
        }
        if let Some(e) = cause.downcast_ref::<CliError>() {
            return exit_code(e.category);
        }
    }
    1
}

fn with_workers(resolved: Resolved, run: fn(Resolved) -> anyhow::Result<()>) -> anyhow::Result<()> {
    match resolved.workers {
        Some(0) => Err(CliError::validation("--workers must be at least 1").into()),
        Some(n) => rayon::ThreadPoolBuilder::new().num_threads(n).build()?.install(|| run(resolved)),
        None => run(resolved),
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Compile(args) => with_workers(args.resolve("compile", Format::Report)?, commands::compile_cmd),
        Command::Simulate(args) => with_workers(args.resolve("simulate", Format::Report)?, commands::simulate_cmd),
        Command::Sweep(args) => with_workers(args.resolve("sweep", Format::Csv)?, commands::sweep_cmd),
        Command::Partition(args) => with_workers(args.resolve("partition", Format::Report)?, commands::partition_cmd),
        Command::Stats(args) => with_workers(args.resolve("stats", Format::Csv)?, commands::stats_cmd),
        Command::Generate { out, seed } => commands::generate_cmd(&out, seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify(&err))
        }
    }
}
