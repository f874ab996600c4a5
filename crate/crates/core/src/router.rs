//! Route selection for qubit movement.
//!
//! Routes run from the qubit that moves to the qubit it must become adjacent
//! to. Success is the product of per-edge success contributions, evaluated
//! left to right along the path.

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::device::{CalibrationSnapshot, QubitId};

/// Default extra-hop budget for variation-aware routing.
pub const DEFAULT_MAH: u32 = 4;

/// Vertex limit for exhaustive route enumeration.
pub const BRUTE_FORCE_GUARD: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CostModel {
    /// Each traversed edge is one two-qubit operation.
    #[serde(rename = "unit")]
    UnitEdge,
    /// Every edge but the last is a SWAP (three CNOTs); the last hosts one CNOT.
    #[default]
    Cnot3,
}

impl CostModel {
    /// Two-qubit operations charged to an edge.
    pub fn ops_on_edge(self, is_final: bool) -> u32 {
        match (self, is_final) {
            (CostModel::Cnot3, false) => 3,
            _ => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            CostModel::UnitEdge => "unit",
            CostModel::Cnot3 => "cnot3",
        }
    }
}

impl fmt::Display for CostModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum RoutePolicy {
    Baseline,
    Vqm { mah: u32, cost_model: CostModel },
}

impl Default for RoutePolicy {
    fn default() -> Self {
        RoutePolicy::Vqm { mah: DEFAULT_MAH, cost_model: CostModel::Cnot3 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RouteError {
    #[error("route endpoints coincide at {0}")]
    SameEndpoints(QubitId),
    #[error("{0} is not a qubit of this device")]
    UnknownQubit(QubitId),
    #[error("no route from {src} to {dst}")]
    Unreachable { src: QubitId, dst: QubitId },
    #[error("route needs at least two vertices")]
    TooShort,
    #[error("{0} and {1} are not adjacent")]
    NotAdjacent(QubitId, QubitId),
    #[error("route revisits {0}")]
    RepeatedVertex(QubitId),
    #[error("exhaustive route search is limited to {limit} qubits, device has {num_qubits}")]
    GuardExceeded { num_qubits: usize, limit: usize },
}

/// A simple path in the coupling graph with at least one hop.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Route {
    path: Vec<QubitId>,
}

impl Route {
    pub fn new(snapshot: &CalibrationSnapshot, path: Vec<QubitId>) -> Result<Self, RouteError> {
        if path.len() < 2 {
            return Err(RouteError::TooShort);
        }
        if let Some(&q) = path.iter().find(|q| q.0 >= snapshot.num_qubits()) {
            return Err(RouteError::UnknownQubit(q));
        }
        for w in path.windows(2) {
            if !snapshot.are_adjacent(w[0], w[1]) {
                return Err(RouteError::NotAdjacent(w[0], w[1]));
            }
        }
        let mut seen = vec![false; snapshot.num_qubits()];
        for &q in &path {
            if std::mem::replace(&mut seen[q.0], true) {
                return Err(RouteError::RepeatedVertex(q));
            }
        }
        Ok(Self { path })
    }

    pub fn path(&self) -> &[QubitId] {
        &self.path
    }

    pub fn hop_count(&self) -> usize {
        self.path.len() - 1
    }

    pub fn source(&self) -> QubitId {
        self.path[0]
    }

    pub fn destination(&self) -> QubitId {
        self.path[self.path.len() - 1]
    }
}

/// Multiply `acc` by the contribution of one edge, one operation at a time.
fn apply_edge(acc: f64, success: f64, ops: u32) -> f64 {
    (0..ops).fold(acc, |a, _| a * success)
}

fn edge_success(snapshot: &CalibrationSnapshot, a: QubitId, b: QubitId) -> f64 {
    snapshot.link_between(a, b).expect("route edges are links").success()
}

fn path_success(snapshot: &CalibrationSnapshot, path: &[QubitId], cost_model: CostModel) -> f64 {
    let hops = path.len() - 1;
    path.windows(2)
        .enumerate()
        .fold(1.0, |acc, (i, w)| apply_edge(acc, edge_success(snapshot, w[0], w[1]), cost_model.ops_on_edge(i + 1 == hops)))
}

pub fn route_success_probability(route: &Route, snapshot: &CalibrationSnapshot, cost_model: CostModel) -> f64 {
    path_success(snapshot, &route.path, cost_model)
}

fn check_endpoints(snapshot: &CalibrationSnapshot, src: QubitId, dst: QubitId) -> Result<(), RouteError> {
    for q in [src, dst] {
        if q.0 >= snapshot.num_qubits() {
            return Err(RouteError::UnknownQubit(q));
        }
    }
    if src == dst {
        return Err(RouteError::SameEndpoints(src));
    }
    if snapshot.distance(src, dst) == u32::MAX {
        return Err(RouteError::Unreachable { src, dst });
    }
    Ok(())
}

/// Fewest hops; among those, the lexicographically smallest vertex sequence.
pub fn find_route_baseline(snapshot: &CalibrationSnapshot, src: QubitId, dst: QubitId) -> Result<Route, RouteError> {
    check_endpoints(snapshot, src, dst)?;
    let mut path = vec![src];
    let mut here = src;
    while here != dst {
        let remaining = snapshot.distance(here, dst);
        here =
            snapshot.neighbors(here).find(|&nb| snapshot.distance(nb, dst) + 1 == remaining).ok_or(RouteError::Unreachable { src, dst })?;
        path.push(here);
    }
    Ok(Route { path })
}

/// Candidate ordering: higher success, then fewer hops, then smaller sequence.
fn better(a_prob: f64, a_path: &[QubitId], b_prob: f64, b_path: &[QubitId]) -> bool {
    match a_prob.partial_cmp(&b_prob).unwrap_or(Ordering::Equal) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => (a_path.len(), a_path) < (b_path.len(), b_path),
    }
}

/// Most reliable route using at most `mah` hops beyond the shortest.
///
/// Relaxes a hop-layered graph whose states are (vertex, hops used), so the
/// hop budget is enforced exactly. The destination is terminal, which makes
/// the final-edge cost of [`CostModel::Cnot3`] a property of the edge. Labels
/// are walks; the optimum over walks is always attained by a simple path.
pub fn find_route_vqm(
    snapshot: &CalibrationSnapshot,
    src: QubitId,
    dst: QubitId,
    mah: u32,
    cost_model: CostModel,
) -> Result<Route, RouteError> {
    check_endpoints(snapshot, src, dst)?;
    let n = snapshot.num_qubits();
    let shortest = snapshot.distance(src, dst) as usize;
    let cap = (shortest + mah as usize).min(n - 1);

    let mut layer: Vec<Option<(f64, Vec<QubitId>)>> = vec![None; n];
    layer[src.0] = Some((1.0, vec![src]));
    let mut best: Option<(f64, Vec<QubitId>)> = None;
    for _hop in 1..=cap {
        let mut next: Vec<Option<(f64, Vec<QubitId>)>> = vec![None; n];
        for (u, label) in layer.iter().enumerate() {
            let Some((prob, path)) = label else { continue };
            if u == dst.0 {
                continue;
            }
            for (v, link) in snapshot.incident_links(QubitId(u)) {
                let p = apply_edge(*prob, link.success(), cost_model.ops_on_edge(v == dst));
                let replace = match &next[v.0] {
                    None => true,
                    Some((q, existing)) => p > *q || (p == *q && path.iter().chain(std::iter::once(&v)).lt(existing.iter())),
                };
                if replace {
                    let mut extended = path.clone();
                    extended.push(v);
                    next[v.0] = Some((p, extended));
                }
            }
        }
        if let Some((p, path)) = next[dst.0].take() {
            if best.as_ref().is_none_or(|(bp, bpath)| better(p, &path, *bp, bpath)) {
                best = Some((p, path));
            }
        }
        layer = next;
    }
    let (_, walk) = best.ok_or(RouteError::Unreachable { src, dst })?;
    Ok(Route { path: remove_cycles(walk) })
}

/// Cut every revisit back to the first occurrence. Only reachable on exact
/// ties, since each removed edge contributes a factor of at most one.
fn remove_cycles(walk: Vec<QubitId>) -> Vec<QubitId> {
    let mut path: Vec<QubitId> = Vec::with_capacity(walk.len());
    for q in walk {
        if let Some(pos) = path.iter().position(|&p| p == q) {
            path.truncate(pos);
        }
        path.push(q);
    }
    path
}

/// Exhaustive search over simple paths of at most `max_hops` hops. Refuses
/// devices above [`BRUTE_FORCE_GUARD`] qubits unless `override_guard` is set.
pub fn brute_force_best_route(
    snapshot: &CalibrationSnapshot,
    src: QubitId,
    dst: QubitId,
    max_hops: usize,
    cost_model: CostModel,
    override_guard: bool,
) -> Result<Route, RouteError> {
    if !override_guard && snapshot.num_qubits() > BRUTE_FORCE_GUARD {
        return Err(RouteError::GuardExceeded { num_qubits: snapshot.num_qubits(), limit: BRUTE_FORCE_GUARD });
    }
    check_endpoints(snapshot, src, dst)?;

    struct Search<'a> {
        snapshot: &'a CalibrationSnapshot,
        dst: QubitId,
        max_hops: usize,
        cost_model: CostModel,
        best: Option<(f64, Vec<QubitId>)>,
    }

    fn dfs(s: &mut Search<'_>, path: &mut Vec<QubitId>) {
        let here = *path.last().expect("non-empty path");
        if here == s.dst {
            let p = path_success(s.snapshot, path, s.cost_model);
            if s.best.as_ref().is_none_or(|(bp, bpath)| better(p, path, *bp, bpath)) {
                s.best = Some((p, path.clone()));
            }
            return;
        }
        if path.len() > s.max_hops {
            return;
        }
        let neighbors: Vec<QubitId> = s.snapshot.neighbors(here).collect();
        for nb in neighbors {
            if !path.contains(&nb) {
                path.push(nb);
                dfs(s, path);
                path.pop();
            }
        }
    }

    let mut search = Search { snapshot, dst, max_hops, cost_model, best: None };
    dfs(&mut search, &mut vec![src]);
    let (_, path) = search.best.ok_or(RouteError::Unreachable { src, dst })?;
    Ok(Route { path })
}

pub fn find_route(snapshot: &CalibrationSnapshot, src: QubitId, dst: QubitId, policy: RoutePolicy) -> Result<Route, RouteError> {
    match policy {
        RoutePolicy::Baseline => find_route_baseline(snapshot, src, dst),
        RoutePolicy::Vqm { mah, cost_model } => find_route_vqm(snapshot, src, dst, mah, cost_model),
    }
}
