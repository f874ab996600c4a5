use serde::{Deserialize, Serialize};

use super::{CalibrationSnapshot, CouplingLink, DeviceError, QubitCalibration};

/// Snapshots of one device over time, all sharing the same topology.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSeries {
    snapshots: Vec<CalibrationSnapshot>,
}

impl CalibrationSeries {
    pub fn new(snapshots: Vec<CalibrationSnapshot>) -> Result<Self, DeviceError> {
        let first = snapshots.first().ok_or(DeviceError::EmptySeries)?;
        if let Some(bad) = snapshots.iter().find(|s| !s.same_topology(first)) {
            return Err(DeviceError::TopologyMismatch(bad.label().to_string()));
        }
        Ok(Self { snapshots })
    }

    pub fn snapshots(&self) -> &[CalibrationSnapshot] {
        &self.snapshots
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }
}

/// Population summary of one calibration metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSummary {
    pub count: usize,
    pub mean: f64,
    /// Population standard deviation.
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

impl MetricSummary {
    pub fn from_values(values: &[f64]) -> Self {
        let count = values.len();
        if count == 0 {
            return Self { count, mean: f64::NAN, std: f64::NAN, min: f64::NAN, max: f64::NAN };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / count as f64;
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self { count, mean, std: var.sqrt(), min, max }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesStatistics {
    pub t1_us: MetricSummary,
    pub t2_us: MetricSummary,
    pub single_qubit_error: MetricSummary,
    pub two_qubit_error: MetricSummary,
    pub readout_error: MetricSummary,
}

impl SeriesStatistics {
    pub fn metrics(&self) -> [(&'static str, &MetricSummary); 5] {
        [
            ("t1_us", &self.t1_us),
            ("t2_us", &self.t2_us),
            ("single_qubit_error", &self.single_qubit_error),
            ("two_qubit_error", &self.two_qubit_error),
            ("readout_error", &self.readout_error),
        ]
    }
}

/// Pooled values of every metric over every qubit/link and every snapshot.
pub fn pooled_metric_values(series: &CalibrationSeries) -> [(&'static str, Vec<f64>); 5] {
    let qubit_metric =
        |f: fn(&QubitCalibration) -> f64| -> Vec<f64> { series.snapshots.iter().flat_map(|s| s.qubits().iter().map(f)).collect() };
    [
        ("t1_us", qubit_metric(|q| q.t1_us)),
        ("t2_us", qubit_metric(|q| q.t2_us)),
        ("single_qubit_error", qubit_metric(|q| q.single_qubit_error)),
        ("two_qubit_error", series.snapshots.iter().flat_map(|s| s.links().iter().map(|l| l.two_qubit_error)).collect()),
        ("readout_error", qubit_metric(|q| q.readout_error)),
    ]
}

pub fn series_statistics(series: &CalibrationSeries) -> SeriesStatistics {
    let [t1, t2, sq, tq, ro] = pooled_metric_values(series).map(|(_, v)| MetricSummary::from_values(&v));
    SeriesStatistics { t1_us: t1, t2_us: t2, single_qubit_error: sq, two_qubit_error: tq, readout_error: ro }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Equal-width histogram over `[min, max]`; the last bin is closed on the right.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    if values.is_empty() || bins == 0 {
        return Vec::new();
    }
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if max > min { (max - min) / bins as f64 } else { 1.0 };
    let mut out: Vec<HistogramBin> =
        (0..bins).map(|i| HistogramBin { lower: min + i as f64 * width, upper: min + (i + 1) as f64 * width, count: 0 }).collect();
    for &v in values {
        let idx = (((v - min) / width) as usize).min(bins - 1);
        out[idx].count += 1;
    }
    out
}

/// Per-qubit and per-link arithmetic mean of every calibration quantity.
pub fn average_snapshot(series: &CalibrationSeries) -> Result<CalibrationSnapshot, DeviceError> {
    let first = series.snapshots.first().ok_or(DeviceError::EmptySeries)?;
    if let Some(bad) = series.snapshots.iter().find(|s| !s.same_topology(first)) {
        return Err(DeviceError::TopologyMismatch(bad.label().to_string()));
    }
    let days = series.len() as f64;
    let qubits = (0..first.num_qubits())
        .map(|i| {
            let mean = |f: fn(&QubitCalibration) -> f64| series.snapshots.iter().map(|s| f(&s.qubits()[i])).sum::<f64>() / days;
            QubitCalibration::new(mean(|q| q.single_qubit_error), mean(|q| q.readout_error), mean(|q| q.t1_us), mean(|q| q.t2_us))
        })
        .collect();
    let links = first
        .links()
        .iter()
        .enumerate()
        .map(|(i, l)| {
            let (a, b) = l.endpoints();
            let mean = series.snapshots.iter().map(|s| s.links()[i].two_qubit_error).sum::<f64>() / days;
            CouplingLink::new(a, b, mean)
        })
        .collect();
    let label = if series.len() == 1 { first.label().to_string() } else { format!("average of {} snapshots", series.len()) };
    CalibrationSnapshot::new(first.name(), label, qubits, links)
}
