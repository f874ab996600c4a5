//! Device topology and calibration data.
//!
//! A [`CalibrationSnapshot`] is one calibration cycle of a device: the coupling
//! graph with a two-qubit error rate on every link, plus per-qubit single-qubit
//! and readout error rates and coherence times. Snapshots are validated on
//! construction and immutable afterwards, so every policy downstream can rely on
//! probabilities in `[0, 1)` and a connected coupling graph.

pub mod catalog;
mod document;
mod series;
pub mod synthetic;
mod topology;

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use document::{load_series_dir, load_snapshot, load_snapshot_file, SnapshotDocument};
pub use series::{
    average_snapshot, histogram, pooled_metric_values, series_statistics, CalibrationSeries, HistogramBin, MetricSummary, SeriesStatistics,
};
pub use topology::Topology;

/// Index of a physical qubit on the device, dense in `0..N`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct QubitId(pub usize);

impl QubitId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Q{}", self.0)
    }
}

impl From<usize> for QubitId {
    fn from(value: usize) -> Self {
        QubitId(value)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DeviceError {
    #[error("snapshot parse error: {0}")]
    Parse(String),
    #[error("invalid {field} on {location}: {value} (expected a probability in [0, 1))")]
    Probability { field: &'static str, location: String, value: f64 },
    #[error("invalid {field} on {location}: {value} (expected a finite positive time)")]
    Coherence { field: &'static str, location: String, value: f64 },
    #[error("header declares {declared} qubits but {found} qubit entries were given")]
    QubitCount { declared: usize, found: usize },
    #[error("qubit id {0} is missing or duplicated")]
    QubitIds(usize),
    #[error("link {u}-{v} references a qubit outside 0..{num_qubits}")]
    LinkOutOfRange { u: usize, v: usize, num_qubits: usize },
    #[error("link {0}-{0} connects a qubit to itself")]
    SelfLoop(usize),
    #[error("duplicate link {0}-{1}")]
    DuplicateLink(usize, usize),
    #[error("coupling graph is disconnected (qubit {0} unreachable from qubit 0)")]
    Disconnected(usize),
    #[error("device has no qubits")]
    Empty,
    #[error("scale factor {0} must be finite and positive")]
    ScaleFactor(f64),
    #[error("scaling by {factor} pushes {field} on {location} to {value} (>= 1)")]
    Scaling { factor: f64, field: &'static str, location: String, value: f64 },
    #[error("snapshot '{0}' does not share the series topology")]
    TopologyMismatch(String),
    #[error("calibration series is empty")]
    EmptySeries,
    #[error("synthetic generator: {0}")]
    Generator(String),
    #[error("{0}")]
    Io(String),
}

/// Per-qubit calibration entry. The qubit id is the entry's position in the snapshot.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QubitCalibration {
    pub single_qubit_error: f64,
    pub readout_error: f64,
    pub t1_us: f64,
    pub t2_us: f64,
}

impl QubitCalibration {
    pub fn new(single_qubit_error: f64, readout_error: f64, t1_us: f64, t2_us: f64) -> Self {
        Self { single_qubit_error, readout_error, t1_us, t2_us }
    }

    /// A calibration with no gate or readout error; handy for toy devices.
    pub fn ideal() -> Self {
        Self::new(0.0, 0.0, 100.0, 100.0)
    }
}

/// An undirected coupling link. Endpoints are stored in ascending order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingLink {
    a: QubitId,
    b: QubitId,
    pub two_qubit_error: f64,
}

impl CouplingLink {
    pub fn new(u: impl Into<QubitId>, v: impl Into<QubitId>, two_qubit_error: f64) -> Self {
        let (u, v) = (u.into(), v.into());
        let (a, b) = if u <= v { (u, v) } else { (v, u) };
        Self { a, b, two_qubit_error }
    }

    pub fn endpoints(&self) -> (QubitId, QubitId) {
        (self.a, self.b)
    }

    pub fn success(&self) -> f64 {
        1.0 - self.two_qubit_error
    }

    pub fn touches(&self, q: QubitId) -> bool {
        self.a == q || self.b == q
    }
}

/// Probability that `n_ops` consecutive two-qubit operations on `link` all succeed.
pub fn link_success(link: &CouplingLink, n_ops: u32) -> f64 {
    let s = link.success();
    (0..n_ops).fold(1.0, |acc, _| acc * s)
}

fn check_probability(field: &'static str, location: impl FnOnce() -> String, value: f64) -> Result<(), DeviceError> {
    if value.is_finite() && (0.0..1.0).contains(&value) {
        Ok(())
    } else {
        Err(DeviceError::Probability { field, location: location(), value })
    }
}

fn check_coherence(field: &'static str, location: impl FnOnce() -> String, value: f64) -> Result<(), DeviceError> {
    if value.is_finite() && value > 0.0 {
        Ok(())
    } else {
        Err(DeviceError::Coherence { field, location: location(), value })
    }
}

/// One calibration cycle of a device.
#[derive(Debug, Clone, PartialEq)]
pub struct CalibrationSnapshot {
    name: String,
    label: String,
    qubits: Vec<QubitCalibration>,
    links: Vec<CouplingLink>,
    /// Sorted neighbour lists with the index of the connecting link.
    adjacency: Vec<Vec<(QubitId, usize)>>,
    /// All-pairs hop distances.
    distances: Vec<Vec<u32>>,
}

impl CalibrationSnapshot {
    pub fn new(
        name: impl Into<String>,
        label: impl Into<String>,
        qubits: Vec<QubitCalibration>,
        mut links: Vec<CouplingLink>,
    ) -> Result<Self, DeviceError> {
        let n = qubits.len();
        if n == 0 {
            return Err(DeviceError::Empty);
        }
        for (i, q) in qubits.iter().enumerate() {
            let loc = || format!("qubit {i}");
            check_probability("single_qubit_error", loc, q.single_qubit_error)?;
            check_probability("readout_error", loc, q.readout_error)?;
            check_coherence("t1_us", loc, q.t1_us)?;
            check_coherence("t2_us", loc, q.t2_us)?;
        }
        links.sort_by_key(|l| l.endpoints());
        for (i, link) in links.iter().enumerate() {
            let (a, b) = link.endpoints();
            if b.0 >= n {
                return Err(DeviceError::LinkOutOfRange { u: a.0, v: b.0, num_qubits: n });
            }
            if a == b {
                return Err(DeviceError::SelfLoop(a.0));
            }
            if i > 0 && links[i - 1].endpoints() == (a, b) {
                return Err(DeviceError::DuplicateLink(a.0, b.0));
            }
            check_probability("two_qubit_error", || format!("link {}-{}", a.0, b.0), link.two_qubit_error)?;
        }

        let mut adjacency = vec![Vec::new(); n];
        for (idx, link) in links.iter().enumerate() {
            let (a, b) = link.endpoints();
            adjacency[a.0].push((b, idx));
            adjacency[b.0].push((a, idx));
        }
        for list in &mut adjacency {
            list.sort_unstable();
        }

        let distances: Vec<Vec<u32>> = (0..n).map(|s| bfs_distances(&adjacency, s)).collect();
        if let Some(unreachable) = distances[0].iter().position(|&d| d == u32::MAX) {
            return Err(DeviceError::Disconnected(unreachable));
        }

        Ok(Self { name: name.into(), label: label.into(), qubits, links, adjacency, distances })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn num_qubits(&self) -> usize {
        self.qubits.len()
    }

    pub fn qubit_ids(&self) -> impl Iterator<Item = QubitId> + '_ {
        (0..self.qubits.len()).map(QubitId)
    }

    pub fn qubits(&self) -> &[QubitCalibration] {
        &self.qubits
    }

    pub fn qubit(&self, q: QubitId) -> &QubitCalibration {
        &self.qubits[q.0]
    }

    pub fn links(&self) -> &[CouplingLink] {
        &self.links
    }

    pub fn link_between(&self, a: QubitId, b: QubitId) -> Option<&CouplingLink> {
        self.adjacency.get(a.0)?.binary_search_by_key(&b, |&(nb, _)| nb).ok().map(|pos| &self.links[self.adjacency[a.0][pos].1])
    }

    pub fn are_adjacent(&self, a: QubitId, b: QubitId) -> bool {
        self.link_between(a, b).is_some()
    }

    /// Neighbours of `q` in ascending index order.
    pub fn neighbors(&self, q: QubitId) -> impl Iterator<Item = QubitId> + '_ {
        self.adjacency[q.0].iter().map(|&(nb, _)| nb)
    }

    /// Neighbours of `q` paired with the connecting link.
    pub fn incident_links(&self, q: QubitId) -> impl Iterator<Item = (QubitId, &CouplingLink)> + '_ {
        self.adjacency[q.0].iter().map(move |&(nb, idx)| (nb, &self.links[idx]))
    }

    pub fn degree(&self, q: QubitId) -> usize {
        self.adjacency[q.0].len()
    }

    /// Hop distance in the coupling graph.
    pub fn distance(&self, a: QubitId, b: QubitId) -> u32 {
        self.distances[a.0][b.0]
    }

    /// Sum of link success probabilities over every link incident to `q`.
    pub fn connectivity_strength(&self, q: QubitId) -> f64 {
        compensated_sum(self.incident_links(q).map(|(_, l)| l.success()))
    }

    /// Connectivity strength counting only links whose other endpoint satisfies `keep`.
    pub fn connectivity_strength_within(&self, q: QubitId, keep: impl Fn(QubitId) -> bool) -> f64 {
        compensated_sum(self.incident_links(q).filter(|(nb, _)| keep(*nb)).map(|(_, l)| l.success()))
    }

    /// Divide every error probability by `factor`. Coherence times are left alone.
    pub fn scale_error_rates(&self, factor: f64) -> Result<Self, DeviceError> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(DeviceError::ScaleFactor(factor));
        }
        let check = |field: &'static str, location: String, value: f64| {
            if value < 1.0 {
                Ok(value)
            } else {
                Err(DeviceError::Scaling { factor, field, location, value })
            }
        };
        let mut out = self.clone();
        for (i, q) in out.qubits.iter_mut().enumerate() {
            q.single_qubit_error = check("single_qubit_error", format!("qubit {i}"), q.single_qubit_error / factor)?;
            q.readout_error = check("readout_error", format!("qubit {i}"), q.readout_error / factor)?;
        }
        for link in &mut out.links {
            let (a, b) = link.endpoints();
            link.two_qubit_error = check("two_qubit_error", format!("link {}-{}", a.0, b.0), link.two_qubit_error / factor)?;
        }
        Ok(out)
    }

    /// Replace the two-qubit error of an existing link.
    pub fn with_link_error(&self, a: QubitId, b: QubitId, error: f64) -> Result<Self, DeviceError> {
        check_probability("two_qubit_error", || format!("link {}-{}", a.0, b.0), error)?;
        let mut out = self.clone();
        let key = CouplingLink::new(a, b, 0.0).endpoints();
        match out.links.iter_mut().find(|l| l.endpoints() == key) {
            Some(link) => {
                link.two_qubit_error = error;
                Ok(out)
            }
            None => Err(DeviceError::LinkOutOfRange { u: a.0, v: b.0, num_qubits: self.num_qubits() }),
        }
    }

    /// True when both snapshots have the same qubit count and link set.
    pub fn same_topology(&self, other: &CalibrationSnapshot) -> bool {
        self.num_qubits() == other.num_qubits()
            && self.links.len() == other.links.len()
            && self.links.iter().zip(&other.links).all(|(x, y)| x.endpoints() == y.endpoints())
    }

    pub fn topology(&self) -> Topology {
        Topology::new(self.num_qubits(), self.links.iter().map(|l| (l.a.0, l.b.0)).collect())
    }

    /// Sub-device induced by `vertices`, relabelled densely in ascending order of the
    /// original ids. Returns the new snapshot and the map from new id to original id.
    pub fn induced(&self, vertices: &[QubitId]) -> Result<(Self, Vec<QubitId>), DeviceError> {
        let mut members = vertices.to_vec();
        members.sort_unstable();
        members.dedup();
        let mut new_id = vec![usize::MAX; self.num_qubits()];
        for (i, q) in members.iter().enumerate() {
            new_id[q.0] = i;
        }
        let qubits = members.iter().map(|q| self.qubits[q.0]).collect();
        let links = self
            .links
            .iter()
            .filter(|l| new_id[l.a.0] != usize::MAX && new_id[l.b.0] != usize::MAX)
            .map(|l| CouplingLink::new(new_id[l.a.0], new_id[l.b.0], l.two_qubit_error))
            .collect();
        let sub = CalibrationSnapshot::new(self.name.clone(), self.label.clone(), qubits, links)?;
        Ok((sub, members))
    }

    /// Whether `vertices` induce a connected subgraph.
    pub fn is_connected_subset(&self, vertices: &[QubitId]) -> bool {
        let mut members = vertices.to_vec();
        members.sort_unstable();
        members.dedup();
        let Some(&start) = members.first() else {
            return false;
        };
        let mut member = vec![false; self.num_qubits()];
        for q in &members {
            member[q.0] = true;
        }
        let mut seen = vec![false; self.num_qubits()];
        seen[start.0] = true;
        let mut stack = vec![start];
        let mut count = 1;
        while let Some(q) = stack.pop() {
            for nb in self.neighbors(q) {
                if member[nb.0] && !seen[nb.0] {
                    seen[nb.0] = true;
                    count += 1;
                    stack.push(nb);
                }
            }
        }
        count == members.len()
    }
}

fn bfs_distances(adjacency: &[Vec<(QubitId, usize)>], source: usize) -> Vec<u32> {
    let mut dist = vec![u32::MAX; adjacency.len()];
    dist[source] = 0;
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        for &(v, _) in &adjacency[u] {
            if dist[v.0] == u32::MAX {
                dist[v.0] = dist[u] + 1;
                queue.push_back(v.0);
            }
        }
    }
    dist
}

/// Neumaier summation.
fn compensated_sum(values: impl Iterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;
    use proptest::prelude::*;

    /// Build a device with ideal qubits from `(u, v, success)` triples.
    pub fn from_successes(n: usize, edges: &[(usize, usize, f64)]) -> CalibrationSnapshot {
        let links = edges.iter().map(|&(u, v, s)| CouplingLink::new(u, v, 1.0 - s)).collect();
        CalibrationSnapshot::new("fixture", "test", vec![QubitCalibration::ideal(); n], links).unwrap()
    }

    /// Random connected graph: a random spanning tree plus extra edges.
    pub fn arb_graph(max_n: usize) -> impl Strategy<Value = CalibrationSnapshot> {
        (3..=max_n).prop_flat_map(|n| {
            let parents = proptest::collection::vec(any::<prop::sample::Index>(), n - 1);
            let extra = proptest::collection::vec((0..n, 0..n), 0..n);
            let errors = proptest::collection::vec(0.0f64..0.3, n * n);
            (parents, extra, errors).prop_map(move |(parents, extra, errors)| {
                let mut edges: Vec<(usize, usize)> = parents.iter().enumerate().map(|(i, p)| (p.index(i + 1), i + 1)).collect();
                for (a, b) in extra {
                    let e = (a.min(b), a.max(b));
                    if a != b && !edges.iter().any(|&(x, y)| (x.min(y), x.max(y)) == e) {
                        edges.push(e);
                    }
                }
                let triples: Vec<(usize, usize, f64)> = edges.iter().map(|&(a, b)| (a, b, 1.0 - errors[a * n + b])).collect();
                from_successes(n, &triples)
            })
        })
    }
}
