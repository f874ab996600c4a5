//! On-disk snapshot documents.
//!
//! A snapshot is a single TOML (or JSON) document:
//!
//! ```toml
//! [header]
//! name = "toy"
//! num_qubits = 2
//! label = "2018-05-01"
//!
//! [[qubits]]
//! id = 0
//! single_qubit_error = 0.002
//! readout_error = 0.05
//! t1_us = 80.0
//! t2_us = 42.0
//!
//! [[links]]
//! u = 0
//! v = 1
//! two_qubit_error = 0.05
//! ```
//!
//! A series is a directory of such documents, ordered by file name.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{CalibrationSeries, CalibrationSnapshot, CouplingLink, DeviceError, QubitCalibration};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotDocument {
    pub header: Header,
    #[serde(default)]
    pub qubits: Vec<QubitEntry>,
    #[serde(default)]
    pub links: Vec<LinkEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Header {
    pub name: String,
    pub num_qubits: usize,
    pub label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QubitEntry {
    pub id: usize,
    pub single_qubit_error: f64,
    pub readout_error: f64,
    pub t1_us: f64,
    pub t2_us: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LinkEntry {
    pub u: usize,
    pub v: usize,
    pub two_qubit_error: f64,
}

impl SnapshotDocument {
    pub fn from_snapshot(snapshot: &CalibrationSnapshot, note: Option<String>) -> Self {
        Self {
            header: Header {
                name: snapshot.name().to_string(),
                num_qubits: snapshot.num_qubits(),
                label: snapshot.label().to_string(),
                note,
            },
            qubits: snapshot
                .qubits()
                .iter()
                .enumerate()
                .map(|(id, q)| QubitEntry {
                    id,
                    single_qubit_error: q.single_qubit_error,
                    readout_error: q.readout_error,
                    t1_us: q.t1_us,
                    t2_us: q.t2_us,
                })
                .collect(),
            links: snapshot
                .links()
                .iter()
                .map(|l| {
                    let (a, b) = l.endpoints();
                    LinkEntry { u: a.0, v: b.0, two_qubit_error: l.two_qubit_error }
                })
                .collect(),
        }
    }

    pub fn into_snapshot(self) -> Result<CalibrationSnapshot, DeviceError> {
        let n = self.header.num_qubits;
        if self.qubits.len() != n {
            return Err(DeviceError::QubitCount { declared: n, found: self.qubits.len() });
        }
        let mut slots: Vec<Option<QubitCalibration>> = vec![None; n];
        for q in &self.qubits {
            match slots.get_mut(q.id) {
                Some(slot @ None) => *slot = Some(QubitCalibration::new(q.single_qubit_error, q.readout_error, q.t1_us, q.t2_us)),
                _ => return Err(DeviceError::QubitIds(q.id)),
            }
        }
        let qubits = slots.into_iter().map(|q| q.expect("every slot filled")).collect();
        let links = self.links.iter().map(|l| CouplingLink::new(l.u, l.v, l.two_qubit_error)).collect();
        CalibrationSnapshot::new(self.header.name, self.header.label, qubits, links)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("snapshot documents always serialize")
    }
}

/// Parse and validate a snapshot document. JSON is accepted when the text starts with `{`.
pub fn load_snapshot(text: &str) -> Result<CalibrationSnapshot, DeviceError> {
    let doc: SnapshotDocument = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| DeviceError::Parse(e.to_string()))?
    } else {
        toml::from_str(text).map_err(|e| DeviceError::Parse(e.to_string()))?
    };
    doc.into_snapshot()
}

pub fn load_snapshot_file(path: impl AsRef<Path>) -> Result<CalibrationSnapshot, DeviceError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| DeviceError::Io(format!("{}: {e}", path.display())))?;
    load_snapshot(&text).map_err(|e| match e {
        DeviceError::Parse(msg) => DeviceError::Parse(format!("{}: {msg}", path.display())),
        other => other,
    })
}

/// Load every `.toml`/`.json` document in `dir`, ordered by file name.
pub fn load_series_dir(dir: impl AsRef<Path>) -> Result<CalibrationSeries, DeviceError> {
    let dir = dir.as_ref();
    let entries = std::fs::read_dir(dir).map_err(|e| DeviceError::Io(format!("{}: {e}", dir.display())))?;
    let mut paths = Vec::new();
    for entry in entries {
        let path = entry.map_err(|e| DeviceError::Io(e.to_string()))?.path();
        if matches!(path.extension().and_then(|e| e.to_str()), Some("toml" | "json")) {
            paths.push(path);
        }
    }
    paths.sort();
    let snapshots = paths.iter().map(load_snapshot_file).collect::<Result<Vec<_>, _>>()?;
    CalibrationSeries::new(snapshots)
}
