//! Initial placement of program qubits on physical qubits.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::circuit::{interaction_counts, Instruction, InteractionCounts, LogicalCircuit, ProgramQubit};
use crate::device::{CalibrationSnapshot, QubitId};

/// Default instruction window for locality ranking.
pub const DEFAULT_FIRST_N: usize = 50;

/// Upper bound on connected subsets visited by exhaustive region search.
pub const SUBGRAPH_GUARD: usize = 200_000;

/// Seeds tried by the greedy region search.
const GREEDY_SEEDS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum AllocPolicy {
    Trivial,
    #[serde(rename = "swapmin")]
    SwapMinimizing,
    Vqa {
        first_n: usize,
    },
}

impl Default for AllocPolicy {
    fn default() -> Self {
        AllocPolicy::Vqa { first_n: DEFAULT_FIRST_N }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AllocError {
    #[error("program needs {needed} qubits but the device has {available}")]
    Capacity { needed: usize, available: usize },
    #[error("region size {k} is outside 1..={num_qubits}")]
    RegionSize { k: usize, num_qubits: usize },
    #[error("more than {limit} connected {k}-qubit regions; exhaustive enumeration refused")]
    GuardExceeded { k: usize, limit: usize },
    #[error("first_n must be at least 1")]
    FirstN,
    #[error("invalid mapping: {0}")]
    InvalidMapping(String),
}

/// Injective placement of program qubits, with its inverse.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Mapping {
    forward: Vec<QubitId>,
    inverse: Vec<Option<ProgramQubit>>,
}

impl Mapping {
    pub fn new(forward: Vec<QubitId>, num_physical: usize) -> Result<Self, AllocError> {
        let mut inverse = vec![None; num_physical];
        for (p, &q) in forward.iter().enumerate() {
            let slot = inverse
                .get_mut(q.0)
                .ok_or_else(|| AllocError::InvalidMapping(format!("{q} does not exist on a {num_physical}-qubit device")))?;
            if let Some(other) = slot.replace(ProgramQubit(p)) {
                return Err(AllocError::InvalidMapping(format!("{q} holds both {other} and q{p}")));
            }
        }
        Ok(Self { forward, inverse })
    }

    pub fn identity(num_program: usize, num_physical: usize) -> Result<Self, AllocError> {
        if num_program > num_physical {
            return Err(AllocError::Capacity { needed: num_program, available: num_physical });
        }
        Self::new((0..num_program).map(QubitId).collect(), num_physical)
    }

    pub fn physical(&self, p: ProgramQubit) -> QubitId {
        self.forward[p.0]
    }

    pub fn program(&self, q: QubitId) -> Option<ProgramQubit> {
        self.inverse[q.0]
    }

    pub fn forward(&self) -> &[QubitId] {
        &self.forward
    }

    pub fn num_program(&self) -> usize {
        self.forward.len()
    }

    pub fn num_physical(&self) -> usize {
        self.inverse.len()
    }

    /// Exchange whatever the two physical qubits hold.
    pub fn swap_physical(&mut self, a: QubitId, b: QubitId) {
        let (pa, pb) = (self.inverse[a.0], self.inverse[b.0]);
        self.inverse[a.0] = pb;
        self.inverse[b.0] = pa;
        if let Some(p) = pa {
            self.forward[p.0] = b;
        }
        if let Some(p) = pb {
            self.forward[p.0] = a;
        }
    }

    /// Rewrite physical ids through `map` (index = current id) onto a larger device.
    pub fn relabel(&self, map: &[QubitId], num_physical: usize) -> Result<Self, AllocError> {
        Self::new(self.forward.iter().map(|q| map[q.0]).collect(), num_physical)
    }
}

/// Sum of link successes over links with both endpoints in `region`.
pub fn region_score(snapshot: &CalibrationSnapshot, region: &[QubitId]) -> f64 {
    let mut member = vec![false; snapshot.num_qubits()];
    for q in region {
        member[q.0] = true;
    }
    snapshot
        .links()
        .iter()
        .filter(|l| {
            let (a, b) = l.endpoints();
            member[a.0] && member[b.0]
        })
        .map(|l| l.success())
        .sum()
}

fn total_strength(snapshot: &CalibrationSnapshot, region: &[QubitId]) -> f64 {
    region.iter().map(|&q| snapshot.connectivity_strength(q)).sum()
}

/// Region ranking: induced score, then whole-device strength, then the smaller sorted set.
fn region_better(snapshot: &CalibrationSnapshot, a: &[QubitId], b: &[QubitId]) -> bool {
    let by_score = region_score(snapshot, a).partial_cmp(&region_score(snapshot, b)).unwrap_or(Ordering::Equal);
    let by_strength = total_strength(snapshot, a).partial_cmp(&total_strength(snapshot, b)).unwrap_or(Ordering::Equal);
    match by_score.then(by_strength) {
        Ordering::Greater => true,
        Ordering::Less => false,
        Ordering::Equal => a < b,
    }
}

fn bits(snapshot: &CalibrationSnapshot) -> Vec<u64> {
    (0..snapshot.num_qubits()).map(|q| snapshot.neighbors(QubitId(q)).fold(0u64, |m, nb| m | (1 << nb.0))).collect()
}

fn to_ids(mask: u64) -> Vec<QubitId> {
    (0..64).filter(|i| mask >> i & 1 == 1).map(QubitId).collect()
}

/// Every connected `k`-vertex subset, each sorted, in ascending order.
///
/// Each subset is generated exactly once by growing from its smallest vertex
/// and only adding vertices not adjacent to the set grown so far.
pub fn connected_subsets(snapshot: &CalibrationSnapshot, k: usize, limit: usize) -> Result<Vec<Vec<QubitId>>, AllocError> {
    let n = snapshot.num_qubits();
    if k == 0 || k > n {
        return Err(AllocError::RegionSize { k, num_qubits: n });
    }
    if n > 64 {
        return Err(AllocError::GuardExceeded { k, limit });
    }
    let adj = bits(snapshot);

    struct Walk<'a> {
        adj: &'a [u64],
        k: usize,
        limit: usize,
        out: Vec<u64>,
    }

    fn nbhd(adj: &[u64], set: u64) -> u64 {
        let mut m = 0;
        let mut rest = set;
        while rest != 0 {
            let i = rest.trailing_zeros() as usize;
            m |= adj[i];
            rest &= rest - 1;
        }
        m
    }

    fn extend(w: &mut Walk<'_>, set: u64, size: usize, mut ext: u64, root: usize) -> bool {
        if size == w.k {
            w.out.push(set);
            return w.out.len() <= w.limit;
        }
        let above_root = !((2u64 << root) - 1);
        let closed = set | nbhd(w.adj, set);
        while ext != 0 {
            let v = ext.trailing_zeros() as usize;
            ext &= ext - 1;
            let fresh = w.adj[v] & !closed & above_root;
            if !extend(w, set | 1 << v, size + 1, ext | fresh, root) {
                return false;
            }
        }
        true
    }

    let mut walk = Walk { adj: &adj, k, limit, out: Vec::new() };
    for (root, &neighbours) in adj.iter().enumerate() {
        let above_root = !((2u64 << root) - 1);
        if !extend(&mut walk, 1 << root, 1, neighbours & above_root, root) {
            return Err(AllocError::GuardExceeded { k, limit });
        }
    }
    let mut out: Vec<Vec<QubitId>> = walk.out.into_iter().map(to_ids).collect();
    out.sort();
    Ok(out)
}

/// Greedy growth from the strongest qubits, adding the frontier qubit that
/// raises the induced score most.
fn greedy_region(snapshot: &CalibrationSnapshot, k: usize) -> Vec<QubitId> {
    let mut seeds: Vec<QubitId> = snapshot.qubit_ids().collect();
    seeds.sort_by(|a, b| {
        snapshot.connectivity_strength(*b).partial_cmp(&snapshot.connectivity_strength(*a)).unwrap_or(Ordering::Equal).then(a.cmp(b))
    });
    let mut best: Option<Vec<QubitId>> = None;
    for &seed in seeds.iter().take(GREEDY_SEEDS) {
        let mut region = vec![seed];
        let mut member = vec![false; snapshot.num_qubits()];
        member[seed.0] = true;
        while region.len() < k {
            let mut pick: Option<(f64, f64, QubitId)> = None;
            for &q in &region {
                for nb in snapshot.neighbors(q) {
                    if member[nb.0] {
                        continue;
                    }
                    let gain = snapshot.connectivity_strength_within(nb, |x| member[x.0]);
                    let strength = snapshot.connectivity_strength(nb);
                    let take = match pick {
                        None => true,
                        Some((g, s, id)) => (gain, strength) > (g, s) || ((gain, strength) == (g, s) && nb < id),
                    };
                    if take {
                        pick = Some((gain, strength, nb));
                    }
                }
            }
            let (_, _, q) = pick.expect("connected device always has a frontier");
            member[q.0] = true;
            region.push(q);
        }
        region.sort_unstable();
        if best.as_ref().is_none_or(|b| region_better(snapshot, &region, b)) {
            best = Some(region);
        }
    }
    best.expect("at least one seed")
}

/// Connected `k`-qubit region with the largest total induced link success.
/// Exact when the enumeration fits under [`SUBGRAPH_GUARD`], greedy otherwise.
pub fn select_strongest_subgraph(snapshot: &CalibrationSnapshot, k: usize) -> Result<Vec<QubitId>, AllocError> {
    let n = snapshot.num_qubits();
    if k == 0 || k > n {
        return Err(AllocError::RegionSize { k, num_qubits: n });
    }
    match connected_subsets(snapshot, k, SUBGRAPH_GUARD) {
        Ok(candidates) => {
            let mut best = &candidates[0];
            for c in &candidates[1..] {
                if region_better(snapshot, c, best) {
                    best = c;
                }
            }
            Ok(best.clone())
        }
        Err(AllocError::GuardExceeded { .. }) => Ok(greedy_region(snapshot, k)),
        Err(e) => Err(e),
    }
}

/// Extra hops needed by the two-qubit gates among the first `first_n`
/// instructions: sum of (distance - 1) between mapped operands.
pub fn estimated_swap_cost(circuit: &LogicalCircuit, snapshot: &CalibrationSnapshot, mapping: &Mapping, first_n: Option<usize>) -> u64 {
    circuit
        .instructions()
        .iter()
        .take(first_n.unwrap_or(usize::MAX))
        .filter_map(|instr| match instr {
            Instruction::TwoQubit { control, target } => {
                Some(u64::from(snapshot.distance(mapping.physical(*control), mapping.physical(*target))) - 1)
            }
            _ => None,
        })
        .sum()
}

/// Pairwise exchanges inside `region`, kept only when they strictly lower the cost.
fn refine(circuit: &LogicalCircuit, snapshot: &CalibrationSnapshot, mapping: &mut Mapping, region: &[QubitId], first_n: Option<usize>) {
    let mut cost = estimated_swap_cost(circuit, snapshot, mapping, first_n);
    loop {
        let mut improved = false;
        for (i, &a) in region.iter().enumerate() {
            for &b in &region[i + 1..] {
                if mapping.program(a).is_none() && mapping.program(b).is_none() {
                    continue;
                }
                mapping.swap_physical(a, b);
                let trial = estimated_swap_cost(circuit, snapshot, mapping, first_n);
                if trial < cost {
                    cost = trial;
                    improved = true;
                } else {
                    mapping.swap_physical(a, b);
                }
            }
        }
        if !improved || cost == 0 {
            return;
        }
    }
}

struct Placement {
    slots: Vec<Option<QubitId>>,
    used: Vec<bool>,
}

impl Placement {
    fn new(num_program: usize, num_physical: usize) -> Self {
        Self { slots: vec![None; num_program], used: vec![false; num_physical] }
    }

    fn put(&mut self, p: ProgramQubit, q: QubitId) {
        self.slots[p.0] = Some(q);
        self.used[q.0] = true;
    }

    fn finish(self, num_physical: usize) -> Result<Mapping, AllocError> {
        let forward = self.slots.into_iter().map(|q| q.expect("every program qubit placed")).collect();
        Mapping::new(forward, num_physical)
    }
}

/// Free region vertex closest to `anchor`, ties to higher in-region strength, then lower index.
fn nearest_free(
    snapshot: &CalibrationSnapshot,
    region: &[QubitId],
    in_region: &[bool],
    placed: &Placement,
    anchor: Option<QubitId>,
) -> QubitId {
    region
        .iter()
        .copied()
        .filter(|q| !placed.used[q.0])
        .min_by(|&a, &b| {
            let da = anchor.map_or(0, |x| snapshot.distance(x, a));
            let db = anchor.map_or(0, |x| snapshot.distance(x, b));
            let sa = snapshot.connectivity_strength_within(a, |x| in_region[x.0]);
            let sb = snapshot.connectivity_strength_within(b, |x| in_region[x.0]);
            da.cmp(&db).then(sb.partial_cmp(&sa).unwrap_or(Ordering::Equal)).then(a.cmp(&b))
        })
        .expect("region has a free vertex")
}

fn vqa(circuit: &LogicalCircuit, snapshot: &CalibrationSnapshot, first_n: usize) -> Result<Mapping, AllocError> {
    let k = circuit.num_qubits();
    let n = snapshot.num_qubits();
    let region = select_strongest_subgraph(snapshot, k)?;
    let mut in_region = vec![false; n];
    for q in &region {
        in_region[q.0] = true;
    }
    let window = interaction_counts(circuit, Some(first_n));
    let all = interaction_counts(circuit, None);

    let mut pairs = window.pairs();
    pairs.sort_by(|x, y| y.2.cmp(&x.2).then((x.0, x.1).cmp(&(y.0, y.1))));

    let mut links: Vec<(f64, QubitId, QubitId)> = snapshot
        .links()
        .iter()
        .filter_map(|l| {
            let (a, b) = l.endpoints();
            (in_region[a.0] && in_region[b.0]).then_some((l.success(), a, b))
        })
        .collect();
    links.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap_or(Ordering::Equal).then((x.1, x.2).cmp(&(y.1, y.2))));

    let free_neighbours = |q: QubitId, placed: &Placement| snapshot.neighbors(q).filter(|nb| in_region[nb.0] && !placed.used[nb.0]).count();

    let mut placed = Placement::new(k, n);
    for &(a, b, _) in &pairs {
        match (placed.slots[a.0], placed.slots[b.0]) {
            (Some(_), Some(_)) => {}
            (None, None) => {
                let (heavy, light) = if window.weight(b) > window.weight(a) { (b, a) } else { (a, b) };
                match links.iter().find(|(_, x, y)| !placed.used[x.0] && !placed.used[y.0]) {
                    Some(&(_, x, y)) => {
                        let (hx, lx) = if free_neighbours(y, &placed) > free_neighbours(x, &placed) { (y, x) } else { (x, y) };
                        placed.put(heavy, hx);
                        placed.put(light, lx);
                    }
                    None => {
                        let spot = nearest_free(snapshot, &region, &in_region, &placed, None);
                        placed.put(heavy, spot);
                        let spot = nearest_free(snapshot, &region, &in_region, &placed, Some(spot));
                        placed.put(light, spot);
                    }
                }
            }
            (Some(at), None) | (None, Some(at)) => {
                let partner = if placed.slots[a.0].is_none() { a } else { b };
                let adjacent = snapshot
                    .incident_links(at)
                    .filter(|(nb, _)| in_region[nb.0] && !placed.used[nb.0])
                    .max_by(|(x, lx), (y, ly)| lx.success().partial_cmp(&ly.success()).unwrap_or(Ordering::Equal).then(y.cmp(x)))
                    .map(|(nb, _)| nb);
                let spot = adjacent.unwrap_or_else(|| nearest_free(snapshot, &region, &in_region, &placed, Some(at)));
                placed.put(partner, spot);
            }
        }
    }

    let mut rest: Vec<ProgramQubit> = (0..k).map(ProgramQubit).filter(|p| placed.slots[p.0].is_none()).collect();
    rest.sort_by(|x, y| all.weight(*y).cmp(&all.weight(*x)).then(x.cmp(y)));
    for p in rest {
        let partner = (0..k)
            .map(ProgramQubit)
            .filter(|o| placed.slots[o.0].is_some() && all.get(p, *o) > 0)
            .max_by(|x, y| all.get(p, *x).cmp(&all.get(p, *y)).then(y.cmp(x)));
        let anchor = partner.and_then(|o| placed.slots[o.0]);
        let spot = nearest_free(snapshot, &region, &in_region, &placed, anchor);
        placed.put(p, spot);
    }

    let mut mapping = placed.finish(n)?;
    refine(circuit, snapshot, &mut mapping, &region, Some(first_n));
    Ok(mapping)
}

/// Vertex of minimum eccentricity, ties to the lower index.
fn graph_center(snapshot: &CalibrationSnapshot) -> QubitId {
    snapshot
        .qubit_ids()
        .min_by_key(|&q| (snapshot.qubit_ids().map(|o| snapshot.distance(q, o)).max().unwrap_or(0), q))
        .expect("non-empty device")
}

fn bfs_order(snapshot: &CalibrationSnapshot, start: QubitId) -> Vec<QubitId> {
    let mut seen = vec![false; snapshot.num_qubits()];
    seen[start.0] = true;
    let mut order = vec![start];
    let mut i = 0;
    while i < order.len() {
        let q = order[i];
        for nb in snapshot.neighbors(q) {
            if !std::mem::replace(&mut seen[nb.0], true) {
                order.push(nb);
            }
        }
        i += 1;
    }
    order
}

fn swap_minimizing(circuit: &LogicalCircuit, snapshot: &CalibrationSnapshot) -> Result<Mapping, AllocError> {
    let k = circuit.num_qubits();
    let n = snapshot.num_qubits();
    let center = graph_center(snapshot);
    let region: Vec<QubitId> = bfs_order(snapshot, center).into_iter().take(k).collect();
    let all: InteractionCounts = interaction_counts(circuit, None);

    let mut order: Vec<ProgramQubit> = (0..k).map(ProgramQubit).collect();
    order.sort_by(|x, y| all.weight(*y).cmp(&all.weight(*x)).then(x.cmp(y)));

    let mut placed = Placement::new(k, n);
    for p in order {
        let spot = region
            .iter()
            .copied()
            .filter(|q| !placed.used[q.0])
            .min_by_key(|&q| {
                let pull: u64 = (0..k)
                    .filter_map(|o| placed.slots[o].map(|at| u64::from(all.get(p, ProgramQubit(o))) * u64::from(snapshot.distance(q, at))))
                    .sum();
                (pull, snapshot.distance(center, q), q)
            })
            .expect("region holds every program qubit");
        placed.put(p, spot);
    }
    let mut mapping = placed.finish(n)?;
    refine(circuit, snapshot, &mut mapping, &region, None);
    Ok(mapping)
}

/// Initial mapping for `circuit` under `policy`.
pub fn allocate(circuit: &LogicalCircuit, snapshot: &CalibrationSnapshot, policy: AllocPolicy) -> Result<Mapping, AllocError> {
    let (needed, available) = (circuit.num_qubits(), snapshot.num_qubits());
    if needed > available {
        return Err(AllocError::Capacity { needed, available });
    }
    if needed == 0 {
        return Mapping::new(Vec::new(), available);
    }
    match policy {
        AllocPolicy::Trivial => Mapping::identity(needed, available),
        AllocPolicy::SwapMinimizing => swap_minimizing(circuit, snapshot),
        AllocPolicy::Vqa { first_n: 0 } => Err(AllocError::FirstN),
        AllocPolicy::Vqa { first_n } => vqa(circuit, snapshot, first_n),
    }
}
