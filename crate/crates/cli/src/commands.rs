use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::Context;
use qvar_core::circuit::generators;
use qvar_core::circuit::CircuitStats;
use qvar_core::device::synthetic::{self, GeneratorParams};
use qvar_core::device::{catalog, histogram, load_series_dir, load_snapshot_file, series_statistics, SnapshotDocument, Topology};
use qvar_core::reliability::classify_pst;
use qvar_core::{
    analytic_mibf, analytic_pst, circuit_stats, compile, evaluate_partitioning, monte_carlo, parse_qasm, swap_overhead, write_qasm,
    CalibrationSeries, CalibrationSnapshot, ErrorModel, Instruction, LogicalCircuit, MetricClass, Mibf, MonteCarloConfig, PhysicalCircuit,
    RoutePolicy, StptReport, TrialStats,
};
use serde::Serialize;

use crate::config::{CliError, ExperimentConfig, Format, Resolved};

const SIMULATE_SCHEMA: &str = "# qvar simulate v1";
const SWEEP_SCHEMA: &str = "# qvar sweep v1";
const PARTITION_SCHEMA: &str = "# qvar partition v1";
const STATS_SCHEMA: &str = "# qvar stats v1";

trait CoreResult<T> {
    fn core(self) -> anyhow::Result<T>;
}

impl<T, E: Into<qvar_core::Error>> CoreResult<T> for Result<T, E> {
    fn core(self) -> anyhow::Result<T> {
        self.map_err(|e| anyhow::Error::new(e.into()))
    }
}

fn load_scaled_snapshot(config: &ExperimentConfig) -> anyhow::Result<CalibrationSnapshot> {
    let snapshot = load_snapshot_file(config.require_snapshot()?).core()?;
    snapshot.scale_error_rates(config.scale).core()
}

/// A readable file path is loaded as QASM, anything else is a generator spec.
pub fn load_circuit(spec: &str) -> anyhow::Result<LogicalCircuit> {
    let path = Path::new(spec);
    if path.is_file() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("circuit");
        return parse_qasm(name, &text).core().with_context(|| format!("parsing {}", path.display()));
    }
    if spec.contains(':') {
        return generators::from_spec(spec).core();
    }
    Err(anyhow::Error::new(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("{spec}: no such circuit file (generator specs look like qft:16)"),
    )))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match out {
        Some(path) => {
            if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
            }
            std::fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text.into_bytes()
}

fn csv_document<R: Serialize>(schema: &str, rows: &[R]) -> anyhow::Result<Vec<u8>> {
    let mut buf = format!("{schema}\n").into_bytes();
    {
        let mut writer = csv::Writer::from_writer(&mut buf);
        for row in rows {
            writer.serialize(row)?;
        }
        writer.flush()?;
    }
    Ok(buf)
}

fn mibf_cell(m: Mibf) -> String {
    m.to_string()
}

#[derive(Serialize)]
struct CompileDocument<'a> {
    config: &'a ExperimentConfig,
    circuit: CircuitStats,
    overhead: qvar_core::compiler::SwapOverhead,
    physical: qvar_core::compiler::PhysicalReport,
}

pub fn compile_cmd(resolved: Resolved) -> anyhow::Result<()> {
    let config = &resolved.config;
    let snapshot = load_scaled_snapshot(config)?;
    let circuit = load_circuit(config.require_circuit()?)?;
    let physical = compile(&circuit, &snapshot, config.alloc_policy(), config.route_policy()).core()?;
    let doc = CompileDocument { config, circuit: circuit_stats(&circuit), overhead: swap_overhead(&physical), physical: physical.report() };
    match resolved.out.as_deref() {
        Some(path) => {
            emit(Some(path), physical.to_qasm().as_bytes())?;
            emit(Some(&sidecar(path)), &json(&doc))
        }
        None if config.format == Format::Report => emit(None, &json(&doc)),
        None => emit(None, physical.to_qasm().as_bytes()),
    }
}

/// `out.qasm` gets its report at `out.report.json`.
pub fn sidecar(path: &Path) -> PathBuf {
    path.with_extension("report.json")
}

#[derive(Serialize)]
struct Analytic {
    pst: f64,
    mibf: Mibf,
    metric_class: MetricClass,
}

#[derive(Serialize)]
struct SimulateDocument<'a> {
    config: &'a ExperimentConfig,
    circuit: CircuitStats,
    physical_instructions: usize,
    inserted_swaps: usize,
    analytic: Analytic,
    monte_carlo: TrialStats,
}

#[derive(Serialize)]
struct SimulateRow<'a> {
    circuit: &'a str,
    snapshot: &'a str,
    alloc: String,
    route: String,
    physical_instructions: usize,
    inserted_swaps: usize,
    analytic_pst: f64,
    analytic_mibf: String,
    trials: u64,
    successes: u64,
    mc_pst: f64,
    mc_pst_ci95: f64,
    mc_mibf: String,
    metric_class: &'static str,
    seed: u64,
}

fn mc_config(config: &ExperimentConfig, workers: Option<usize>) -> MonteCarloConfig {
    MonteCarloConfig::new(config.trials, config.seed).workers(workers)
}

pub fn simulate_cmd(resolved: Resolved) -> anyhow::Result<()> {
    let config = &resolved.config;
    if config.trials == 0 {
        return Err(CliError::validation("simulate needs --trials of at least 1").into());
    }
    let snapshot = load_scaled_snapshot(config)?;
    let circuit = load_circuit(config.require_circuit()?)?;
    let physical = compile(&circuit, &snapshot, config.alloc_policy(), config.route_policy()).core()?;
    let model = ErrorModel::new(&snapshot).with_readout(config.include_readout);
    let pst = analytic_pst(&physical, &model);
    let mibf = analytic_mibf(&physical, &model);
    let stats = monte_carlo(&physical, &model, mc_config(config, resolved.workers));
    let bytes = match config.format {
        Format::Report => json(&SimulateDocument {
            config,
            circuit: circuit_stats(&circuit),
            physical_instructions: physical.len(),
            inserted_swaps: physical.inserted_swap_count(),
            analytic: Analytic { pst, mibf, metric_class: classify_pst(pst) },
            monte_carlo: stats,
        }),
        Format::Csv => csv_document(
            SIMULATE_SCHEMA,
            &[SimulateRow {
                circuit: circuit.name(),
                snapshot: snapshot.label(),
                alloc: policy_name(&physical),
                route: route_name(physical.route_policy()),
                physical_instructions: physical.len(),
                inserted_swaps: physical.inserted_swap_count(),
                analytic_pst: pst,
                analytic_mibf: mibf_cell(mibf),
                trials: stats.trials,
                successes: stats.successes,
                mc_pst: stats.pst,
                mc_pst_ci95: stats.pst_ci95,
                mc_mibf: mibf_cell(stats.mibf),
                metric_class: stats.metric_class.name(),
                seed: stats.seed,
            }],
        )?,
    };
    emit(resolved.out.as_deref(), &bytes)
}

fn policy_name(physical: &PhysicalCircuit) -> String {
    match physical.alloc_policy() {
        qvar_core::AllocPolicy::Trivial => "trivial".into(),
        qvar_core::AllocPolicy::SwapMinimizing => "swapmin".into(),
        qvar_core::AllocPolicy::Vqa { first_n } => format!("vqa(first_n={first_n})"),
    }
}

fn route_name(policy: RoutePolicy) -> String {
    match policy {
        RoutePolicy::Baseline => "baseline".into(),
        RoutePolicy::Vqm { mah, cost_model } => format!("vqm(mah={mah},{})", cost_model.name()),
    }
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    day: usize,
    label: String,
    policy: String,
    physical_instructions: usize,
    inserted_swaps: usize,
    analytic_pst: f64,
    analytic_mibf: String,
    mc_pst: Option<f64>,
    mc_pst_ci95: Option<f64>,
    mc_mibf: Option<String>,
}

#[derive(Serialize)]
struct PolicySpread {
    policy: String,
    mean_analytic_mibf: f64,
    /// Population coefficient of variation of the per-day analytic MIBF.
    cv_analytic_mibf: f64,
}

#[derive(Serialize)]
struct SweepDocument<'a> {
    config: &'a ExperimentConfig,
    days: usize,
    rows: Vec<SweepRow>,
    spread: Vec<PolicySpread>,
}

pub fn coefficient_of_variation(values: &[f64]) -> f64 {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    var.sqrt() / mean
}

pub fn sweep_cmd(resolved: Resolved) -> anyhow::Result<()> {
    let config = &resolved.config;
    let series = load_series_dir(config.require_series_dir()?).core()?;
    let circuit = load_circuit(config.require_circuit()?)?;
    let policies = [RoutePolicy::Baseline, config.vqm_policy()];
    let mut rows = Vec::new();
    let mut mibfs = vec![Vec::new(); policies.len()];
    for (day, raw) in series.snapshots().iter().enumerate() {
        let snapshot = raw.scale_error_rates(config.scale).core()?;
        let model = ErrorModel::new(&snapshot).with_readout(config.include_readout);
        for (i, &route) in policies.iter().enumerate() {
            let physical = compile(&circuit, &snapshot, config.alloc_policy(), route).core()?;
            let mibf = analytic_mibf(&physical, &model);
            mibfs[i].push(mibf.value());
            let mc = (config.trials > 0).then(|| monte_carlo(&physical, &model, mc_config(config, resolved.workers)));
            rows.push(SweepRow {
                day: day + 1,
                label: snapshot.label().to_string(),
                policy: route_name(route),
                physical_instructions: physical.len(),
                inserted_swaps: physical.inserted_swap_count(),
                analytic_pst: analytic_pst(&physical, &model),
                analytic_mibf: mibf_cell(mibf),
                mc_pst: mc.map(|s| s.pst),
                mc_pst_ci95: mc.map(|s| s.pst_ci95),
                mc_mibf: mc.map(|s| mibf_cell(s.mibf)),
            });
        }
    }
    let bytes = match config.format {
        Format::Csv => csv_document(SWEEP_SCHEMA, &rows)?,
        Format::Report => {
            let spread = policies
                .iter()
                .zip(&mibfs)
                .map(|(&p, v)| PolicySpread {
                    policy: route_name(p),
                    mean_analytic_mibf: v.iter().sum::<f64>() / v.len() as f64,
                    cv_analytic_mibf: coefficient_of_variation(v),
                })
                .collect();
            json(&SweepDocument { config, days: series.len(), rows, spread })
        }
    };
    emit(resolved.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct PartitionDocument<'a> {
    config: &'a ExperimentConfig,
    result: &'a StptReport,
}

#[derive(Serialize)]
struct PartitionRow<'a> {
    circuit: &'a str,
    snapshot: &'a str,
    region_size: usize,
    region_x: String,
    region_y: String,
    pst_x: f64,
    pst_y: f64,
    stpt_two: f64,
    stpt_one: f64,
    gain_ratio: f64,
    recommendation: &'static str,
    regions_evaluated: usize,
}

fn join_ids(ids: &[qvar_core::QubitId]) -> String {
    ids.iter().map(|q| q.0.to_string()).collect::<Vec<_>>().join(" ")
}

pub fn partition_cmd(resolved: Resolved) -> anyhow::Result<()> {
    let config = &resolved.config;
    let snapshot = load_scaled_snapshot(config)?;
    let circuit = load_circuit(config.require_circuit()?)?;
    let model = ErrorModel::new(&snapshot).with_readout(config.include_readout);
    let report =
        evaluate_partitioning(&circuit, &snapshot, config.alloc_policy(), config.route_policy(), &model, config.region_size).core()?;
    let bytes = match config.format {
        Format::Report => json(&PartitionDocument { config, result: &report }),
        Format::Csv => csv_document(
            PARTITION_SCHEMA,
            &[PartitionRow {
                circuit: &report.circuit,
                snapshot: &report.snapshot_label,
                region_size: report.region_size,
                region_x: join_ids(&report.region_x),
                region_y: join_ids(&report.region_y),
                pst_x: report.pst_x,
                pst_y: report.pst_y,
                stpt_two: report.stpt_two,
                stpt_one: report.stpt_one,
                gain_ratio: report.gain_ratio,
                recommendation: report.recommendation.name(),
                regions_evaluated: report.regions_evaluated,
            }],
        )?,
    };
    emit(resolved.out.as_deref(), &bytes)
}

#[derive(Serialize)]
struct StatsRow {
    metric: &'static str,
    kind: &'static str,
    count: usize,
    mean: Option<f64>,
    std: Option<f64>,
    min: Option<f64>,
    max: Option<f64>,
    bin_lower: Option<f64>,
    bin_upper: Option<f64>,
}

#[derive(Serialize)]
struct MetricDocument {
    metric: &'static str,
    summary: qvar_core::device::MetricSummary,
    histogram: Vec<qvar_core::device::HistogramBin>,
}

#[derive(Serialize)]
struct StatsDocument<'a> {
    config: &'a ExperimentConfig,
    snapshots: usize,
    metrics: Vec<MetricDocument>,
}

/// Statistics describe the data as stored, so `--scale` is not applied.
pub fn stats_cmd(resolved: Resolved) -> anyhow::Result<()> {
    let config = &resolved.config;
    let series = match (&config.series_dir, &config.snapshot) {
        (Some(dir), _) => load_series_dir(dir).core()?,
        (None, Some(path)) => CalibrationSeries::new(vec![load_snapshot_file(path).core()?]).core()?,
        (None, None) => return Err(CliError::validation("stats needs --series-dir or --snapshot").into()),
    };
    let summary = series_statistics(&series);
    let values = qvar_core::device::pooled_metric_values(&series);
    let metrics: Vec<MetricDocument> = summary
        .metrics()
        .iter()
        .zip(values.iter())
        .map(|(&(metric, s), (_, v))| MetricDocument { metric, summary: *s, histogram: histogram(v, config.bins) })
        .collect();
    let bytes = match config.format {
        Format::Report => json(&StatsDocument { config, snapshots: series.len(), metrics }),
        Format::Csv => {
            let mut rows = Vec::new();
            for m in &metrics {
                let s = &m.summary;
                rows.push(StatsRow {
                    metric: m.metric,
                    kind: "summary",
                    count: s.count,
                    mean: Some(s.mean),
                    std: Some(s.std),
                    min: Some(s.min),
                    max: Some(s.max),
                    bin_lower: None,
                    bin_upper: None,
                });
                rows.extend(m.histogram.iter().map(|b| StatsRow {
                    metric: m.metric,
                    kind: "bin",
                    count: b.count,
                    mean: None,
                    std: None,
                    min: None,
                    max: None,
                    bin_lower: Some(b.lower),
                    bin_upper: Some(b.upper),
                }));
            }
            csv_document(STATS_SCHEMA, &rows)?
        }
    };
    emit(resolved.out.as_deref(), &bytes)
}

/// Link that degrades over the bundled series: a central vertical link.
pub const DEGRADING_LINK: (usize, usize) = (7, 12);
pub const DEGRADED_ERROR: f64 = 0.15;
const BUNDLED_BENCHMARKS: usize = 5;

fn write_snapshot(dir: &Path, file: &str, snapshot: &CalibrationSnapshot, note: Option<&str>) -> anyhow::Result<()> {
    let doc = SnapshotDocument::from_snapshot(snapshot, note.map(str::to_string));
    emit(Some(&dir.join(file)), doc.to_toml().as_bytes())
}

fn write_series(dir: &Path, series: &CalibrationSeries, note: &str) -> anyhow::Result<()> {
    for (i, s) in series.snapshots().iter().enumerate() {
        write_snapshot(dir, &format!("day-{:02}.toml", i + 1), s, Some(note))?;
    }
    Ok(())
}

/// Write the bundled snapshots, series and benchmark circuits under `out`.
pub fn generate_cmd(out: &Path, seed: u64) -> anyhow::Result<()> {
    let snapshots = out.join("snapshots");
    let reference = synthetic::ibm_q20_reference_snapshot(seed).core()?;
    let note = format!("synthetic IBM-Q20-style calibration, seed {seed}; not measured data");
    write_snapshot(&snapshots, "ibmq20-reference.toml", &reference, Some(&note))?;
    for (file, device) in [
        ("ring-5.toml", catalog::five_qubit_ring()),
        ("grid-6.toml", catalog::six_qubit_grid()),
        ("mesh-6.toml", catalog::six_qubit_mesh()),
    ] {
        write_snapshot(&snapshots, file, &device, Some("worked example with ideal qubits"))?;
    }

    let params = GeneratorParams::ibm_q20();
    let series = synthetic::generate_synthetic_series(&Topology::ibm_q20(), &params, 7, seed).core()?;
    write_series(&out.join("series/ibmq20-7day"), &series, &format!("synthetic 7-day series, seed {seed}"))?;
    let degrading = synthetic::degrading_link_series(&reference, &params, 7, seed, DEGRADING_LINK, DEGRADED_ERROR).core()?;
    let note = format!(
        "synthetic 7-day series around the reference snapshot, link {}-{} degrading to {DEGRADED_ERROR}, seed {seed}",
        DEGRADING_LINK.0, DEGRADING_LINK.1
    );
    write_series(&out.join("series/ibmq20-degrading"), &degrading, &note)?;

    let benchmarks = out.join("benchmarks");
    for circuit in generators::standard_suite().iter().take(BUNDLED_BENCHMARKS) {
        emit(Some(&benchmarks.join(format!("{}.qasm", circuit.name()))), write_qasm(circuit).as_bytes())?;
    }
    let chain = LogicalCircuit::new("chain-3", 3, 0, vec![Instruction::cx(0, 1), Instruction::cx(1, 2)]).core()?;
    emit(Some(&benchmarks.join("chain-3.qasm")), write_qasm(&chain).as_bytes())
}
