use std::fmt;
use std::path::{Path, PathBuf};

use clap::{Args, ValueEnum};
use qvar_core::device::synthetic::REFERENCE_SEED;
use qvar_core::{AllocPolicy, CostModel, ErrorCategory, RoutePolicy};
use serde::{Deserialize, Serialize};

/// Failure raised by the CLI itself rather than the library.
#[derive(Debug)]
pub struct CliError {
    pub category: ErrorCategory,
    pub message: String,
}

impl CliError {
    pub fn validation(message: impl Into<String>) -> Self {
        Self { category: ErrorCategory::Validation, message: message.into() }
    }

    pub fn parse(message: impl Into<String>) -> Self {
        Self { category: ErrorCategory::Parse, message: message.into() }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl std::error::Error for CliError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AllocChoice {
    Trivial,
    Swapmin,
    Vqa,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RouteChoice {
    Baseline,
    Vqm,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostChoice {
    Unit,
    Cnot3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Report,
}

/// Flags shared by every experiment command. Anything left unset falls back to
/// the config file, then to the defaults.
#[derive(Debug, Clone, Default, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentArgs {
    /// TOML file with any of the options below; flags take precedence.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<PathBuf>,
    /// Calibration snapshot (TOML or JSON).
    #[arg(long)]
    pub snapshot: Option<String>,
    /// Directory of daily snapshots.
    #[arg(long)]
    pub series_dir: Option<String>,
    /// QASM file or generator spec such as `qft:16` or `random:20:200:7`.
    #[arg(long)]
    pub circuit: Option<String>,
    #[arg(long, value_enum)]
    pub alloc: Option<AllocChoice>,
    #[arg(long, value_enum)]
    pub route: Option<RouteChoice>,
    /// Maximum additional hops over the shortest route.
    #[arg(long)]
    pub mah: Option<u32>,
    #[arg(long, value_enum)]
    pub cost_model: Option<CostChoice>,
    /// Instructions considered when placing qubits.
    #[arg(long)]
    pub first_n: Option<usize>,
    /// Monte Carlo trials; 0 skips simulation where that makes sense.
    #[arg(long)]
    pub trials: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Divide every error rate by this factor.
    #[arg(long)]
    pub scale: Option<f64>,
    #[arg(long)]
    pub include_readout: Option<bool>,
    /// Qubits per copy for partition studies.
    #[arg(long)]
    pub region_size: Option<usize>,
    /// Histogram bins for `stats`.
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Output path; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Worker threads. Never changes the output.
    #[arg(long)]
    pub workers: Option<usize>,
}

macro_rules! overlay {
    ($dst:ident, $src:ident, $($field:ident),*) => {
        $( if $dst.$field.is_none() { $dst.$field = $src.$field.clone(); } )*
    };
}

impl ExperimentArgs {
    /// Fill unset flags from `--config`, if given.
    pub fn with_config_file(mut self) -> anyhow::Result<Self> {
        let Some(path) = self.config.clone() else { return Ok(self) };
        let text =
            std::fs::read_to_string(&path).map_err(|e| anyhow::Error::new(e).context(format!("reading config {}", path.display())))?;
        let file: ExperimentArgs = toml::from_str(&text).map_err(|e| CliError::parse(format!("{}: {e}", path.display())))?;
        overlay!(
            self,
            file,
            snapshot,
            series_dir,
            circuit,
            alloc,
            route,
            mah,
            cost_model,
            first_n,
            trials,
            seed,
            scale,
            include_readout,
            region_size,
            bins,
            format,
            out,
            workers
        );
        Ok(self)
    }

    pub fn resolve(self, command: &'static str, default_format: Format) -> anyhow::Result<Resolved> {
        let args = self.with_config_file()?;
        let config = ExperimentConfig {
            command: command.to_string(),
            snapshot: args.snapshot,
            series_dir: args.series_dir,
            circuit: args.circuit,
            alloc: args.alloc.unwrap_or(AllocChoice::Vqa),
            first_n: args.first_n.unwrap_or(qvar_core::allocator::DEFAULT_FIRST_N),
            route: args.route.unwrap_or(RouteChoice::Vqm),
            mah: args.mah.unwrap_or(qvar_core::router::DEFAULT_MAH),
            cost_model: args.cost_model.unwrap_or(CostChoice::Cnot3),
            trials: args.trials.unwrap_or(1_000_000),
            seed: args.seed.unwrap_or(REFERENCE_SEED),
            scale: args.scale.unwrap_or(10.0),
            include_readout: args.include_readout.unwrap_or(true),
            region_size: args.region_size,
            bins: args.bins.unwrap_or(20),
            format: args.format.unwrap_or(default_format),
        };
        config.validate()?;
        Ok(Resolved { config, out: args.out, workers: args.workers })
    }
}

/// Every option that can influence a command's output. Embedded in reports.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub command: String,
    pub snapshot: Option<String>,
    pub series_dir: Option<String>,
    pub circuit: Option<String>,
    pub alloc: AllocChoice,
    pub first_n: usize,
    pub route: RouteChoice,
    pub mah: u32,
    pub cost_model: CostChoice,
    pub trials: u64,
    pub seed: u64,
    pub scale: f64,
    pub include_readout: bool,
    pub region_size: Option<usize>,
    pub bins: usize,
    pub format: Format,
}

#[derive(Debug)]
pub struct Resolved {
    pub config: ExperimentConfig,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    fn validate(&self) -> Result<(), CliError> {
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return Err(CliError::validation(format!("--scale must be a positive number, got {}", self.scale)));
        }
        if self.first_n == 0 {
            return Err(CliError::validation("--first-n must be at least 1"));
        }
        if self.bins == 0 {
            return Err(CliError::validation("--bins must be at least 1"));
        }
        Ok(())
    }

    pub fn alloc_policy(&self) -> AllocPolicy {
        match self.alloc {
            AllocChoice::Trivial => AllocPolicy::Trivial,
            AllocChoice::Swapmin => AllocPolicy::SwapMinimizing,
            AllocChoice::Vqa => AllocPolicy::Vqa { first_n: self.first_n },
        }
    }

    pub fn vqm_policy(&self) -> RoutePolicy {
        let cost_model = match self.cost_model {
            CostChoice::Unit => CostModel::UnitEdge,
            CostChoice::Cnot3 => CostModel::Cnot3,
        };
        RoutePolicy::Vqm { mah: self.mah, cost_model }
    }

    pub fn route_policy(&self) -> RoutePolicy {
        match self.route {
            RouteChoice::Baseline => RoutePolicy::Baseline,
            RouteChoice::Vqm => self.vqm_policy(),
        }
    }

    pub fn require_snapshot(&self) -> Result<&Path, CliError> {
        self.snapshot.as_deref().map(Path::new).ok_or_else(|| CliError::validation("--snapshot is required"))
    }

    pub fn require_series_dir(&self) -> Result<&Path, CliError> {
        self.series_dir.as_deref().map(Path::new).ok_or_else(|| CliError::validation("--series-dir is required"))
    }

    pub fn require_circuit(&self) -> Result<&str, CliError> {
        self.circuit.as_deref().ok_or_else(|| CliError::validation("--circuit is required"))
    }
}
