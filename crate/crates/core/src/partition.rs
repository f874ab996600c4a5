//! Two concurrent copies on disjoint regions versus one copy on the best region.
//!
//! Both arms run one round per unit time, so successful trials per unit time
//! are `PST_X + PST_Y` for two copies and the single copy's PST otherwise.

use std::cmp::Ordering;

use rayon::prelude::*;
use serde::Serialize;

use crate::allocator::{connected_subsets, AllocError, AllocPolicy, SUBGRAPH_GUARD};
use crate::circuit::LogicalCircuit;
use crate::compiler::{compile, compile_on_region, CompileError};
use crate::device::{CalibrationSnapshot, QubitId};
use crate::reliability::{analytic_pst, ErrorModel};
use crate::router::RoutePolicy;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PartitionError {
    #[error("two copies of {k} qubits need {needed} qubits but the device has {available}")]
    Capacity { k: usize, needed: usize, available: usize },
    #[error("region size {k} is smaller than the program's {program} qubits")]
    RegionTooSmall { k: usize, program: usize },
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error("no two disjoint connected {0}-qubit regions exist on this device")]
    NoPartition(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Recommendation {
    OneCopy,
    TwoCopies,
}

impl Recommendation {
    pub fn name(self) -> &'static str {
        match self {
            Recommendation::OneCopy => "one_copy",
            Recommendation::TwoCopies => "two_copies",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StptReport {
    pub circuit: String,
    pub snapshot_label: String,
    pub region_size: usize,
    pub alloc_policy: AllocPolicy,
    pub route_policy: RoutePolicy,
    pub include_readout_errors: bool,
    /// Stronger copy first.
    pub region_x: Vec<QubitId>,
    pub region_y: Vec<QubitId>,
    pub pst_x: f64,
    pub pst_y: f64,
    pub stpt_two: f64,
    pub stpt_one: f64,
    /// Region holding the single copy; `None` when the full-device compile won.
    pub one_copy_region: Option<Vec<QubitId>>,
    /// `stpt_two` relative to the stronger copy alone.
    pub gain_ratio: f64,
    pub recommendation: Recommendation,
    pub regions_evaluated: usize,
}

fn mask(region: &[QubitId]) -> u64 {
    region.iter().fold(0, |m, q| m | 1 << q.0)
}

fn check_capacity(snapshot: &CalibrationSnapshot, k: usize) -> Result<(), PartitionError> {
    let available = snapshot.num_qubits();
    if k == 0 || 2 * k > available {
        return Err(PartitionError::Capacity { k, needed: 2 * k, available });
    }
    Ok(())
}

/// Two disjoint regions, smaller first.
pub type RegionPair = (Vec<QubitId>, Vec<QubitId>);

/// All unordered pairs of disjoint connected `k`-qubit regions. Each pair is
/// ordered (smaller region first) and the list is sorted.
pub fn enumerate_partitions(snapshot: &CalibrationSnapshot, k: usize) -> Result<Vec<RegionPair>, PartitionError> {
    check_capacity(snapshot, k)?;
    let regions = connected_subsets(snapshot, k, SUBGRAPH_GUARD)?;
    let masks: Vec<u64> = regions.iter().map(|r| mask(r)).collect();
    let mut out = Vec::new();
    for i in 0..regions.len() {
        for j in i + 1..regions.len() {
            if masks[i] & masks[j] == 0 {
                out.push((regions[i].clone(), regions[j].clone()));
            }
        }
    }
    Ok(out)
}

/// Compare two copies on the best pair of disjoint regions against one copy.
///
/// Region size defaults to the program's qubit count. The single copy takes the
/// better of a full-device compile and the best single region, so it is never
/// worse than either copy of any partition.
pub fn evaluate_partitioning(
    circuit: &LogicalCircuit,
    snapshot: &CalibrationSnapshot,
    alloc_policy: AllocPolicy,
    route_policy: RoutePolicy,
    model: &ErrorModel<'_>,
    region_size: Option<usize>,
) -> Result<StptReport, PartitionError> {
    let program = circuit.num_qubits();
    let k = region_size.unwrap_or(program);
    if k < program {
        return Err(PartitionError::RegionTooSmall { k, program });
    }
    check_capacity(snapshot, k)?;
    let regions = connected_subsets(snapshot, k, SUBGRAPH_GUARD)?;
    let psts: Vec<f64> = regions
        .par_iter()
        .map(|r| {
            let physical = compile_on_region(circuit, snapshot, r, alloc_policy, route_policy)?;
            Ok(analytic_pst(&physical, model))
        })
        .collect::<Result<_, CompileError>>()?;
    let masks: Vec<u64> = regions.iter().map(|r| mask(r)).collect();

    let mut order: Vec<usize> = (0..regions.len()).collect();
    order.sort_by(|&a, &b| psts[b].partial_cmp(&psts[a]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));

    // Best pair by sum, ties to the canonically smaller (first, second) index pair.
    let mut best: Option<(f64, usize, usize)> = None;
    for (pos, &i) in order.iter().enumerate() {
        if let Some((sum, _, _)) = best {
            if psts[i] + psts[i] < sum {
                break;
            }
        }
        for &j in &order[pos + 1..] {
            let sum = psts[i] + psts[j];
            if let Some((b, _, _)) = best {
                if sum < b {
                    break;
                }
            }
            if masks[i] & masks[j] != 0 {
                continue;
            }
            let key = (i.min(j), i.max(j));
            let take = match best {
                None => true,
                Some((b, x, y)) => sum > b || (sum == b && key < (x.min(y), x.max(y))),
            };
            if take {
                best = Some((sum, i, j));
            }
        }
    }
    let (_, i, j) = best.ok_or(PartitionError::NoPartition(k))?;
    let (x, y) = if psts[i] > psts[j] || (psts[i] == psts[j] && i < j) { (i, j) } else { (j, i) };
    let (pst_x, pst_y) = (psts[x], psts[y]);
    let stpt_two = pst_x + pst_y;

    let full = analytic_pst(&compile(circuit, snapshot, alloc_policy, route_policy)?, model);
    let top = order[0];
    let (stpt_one, one_copy_region) = if full >= psts[top] { (full, None) } else { (psts[top], Some(regions[top].clone())) };

    let recommendation = if stpt_two > stpt_one { Recommendation::TwoCopies } else { Recommendation::OneCopy };
    Ok(StptReport {
        circuit: circuit.name().to_string(),
        snapshot_label: snapshot.label().to_string(),
        region_size: k,
        alloc_policy,
        route_policy,
        include_readout_errors: model.include_readout_errors,
        region_x: regions[x].clone(),
        region_y: regions[y].clone(),
        pst_x,
        pst_y,
        stpt_two,
        stpt_one,
        one_copy_region,
        gain_ratio: if pst_x > 0.0 { stpt_two / pst_x } else { 0.0 },
        recommendation,
        regions_evaluated: regions.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{generators, Instruction};
    use crate::device::fixtures::{arb_graph, from_successes};
    use proptest::prelude::*;

    fn ids(v: &[usize]) -> Vec<QubitId> {
        v.iter().map(|&i| QubitId(i)).collect()
    }

    /// Rows A B / C D / E F, indexed A0 B1 C2 D3 E4 F5.
    fn mesh() -> CalibrationSnapshot {
        from_successes(6, &[(1, 3, 0.8), (3, 5, 0.4), (0, 2, 0.4), (2, 4, 0.3), (0, 1, 0.3), (4, 5, 0.3), (2, 3, 0.9)])
    }

    fn chain3() -> LogicalCircuit {
        LogicalCircuit::new("chain", 3, 0, vec![Instruction::cx(0, 1), Instruction::cx(1, 2)]).unwrap()
    }

    #[test]
    fn mesh_two_copy_numbers() {
        let s = mesh();
        let r = evaluate_partitioning(&chain3(), &s, AllocPolicy::default(), RoutePolicy::default(), &ErrorModel::new(&s), None).unwrap();
        assert_eq!(r.region_x, ids(&[1, 3, 5]));
        assert_eq!(r.region_y, ids(&[0, 2, 4]));
        assert!((r.pst_x - 0.32).abs() < 1e-9);
        assert!((r.pst_y - 0.12).abs() < 1e-9);
        assert!((r.stpt_two - 0.44).abs() < 1e-9);
        assert!((r.gain_ratio - 1.375).abs() < 1e-9);
        assert!((r.stpt_one - 0.72).abs() < 1e-9);
        assert_eq!(r.recommendation, Recommendation::OneCopy);
    }

    #[test]
    fn path_has_one_half_split() {
        let path = from_successes(4, &[(0, 1, 0.9), (1, 2, 0.9), (2, 3, 0.9)]);
        assert_eq!(enumerate_partitions(&path, 2).unwrap(), vec![(ids(&[0, 1]), ids(&[2, 3]))]);
        assert!(matches!(enumerate_partitions(&path, 3), Err(PartitionError::Capacity { .. })));
    }

    #[test]
    fn grid_partitions_match_subset_oracle() {
        let grid = from_successes(6, &[(0, 1, 0.9), (1, 2, 0.9), (3, 4, 0.9), (4, 5, 0.9), (0, 3, 0.9), (1, 4, 0.9), (2, 5, 0.9)]);
        let got = enumerate_partitions(&grid, 3).unwrap();
        let mut oracle = Vec::new();
        for a in 0u32..64 {
            for b in a + 1..64 {
                if a.count_ones() == 3 && b.count_ones() == 3 && a & b == 0 {
                    let (ra, rb) = (
                        (0..6).filter(|i| a >> i & 1 == 1).map(QubitId).collect::<Vec<_>>(),
                        (0..6).filter(|i| b >> i & 1 == 1).map(QubitId).collect::<Vec<_>>(),
                    );
                    if grid.is_connected_subset(&ra) && grid.is_connected_subset(&rb) {
                        oracle.push(if ra < rb { (ra, rb) } else { (rb, ra) });
                    }
                }
            }
        }
        oracle.sort();
        assert_eq!(got, oracle);
        assert!(got.contains(&(ids(&[0, 1, 2]), ids(&[3, 4, 5]))));
        assert!(got.contains(&(ids(&[0, 1, 3]), ids(&[2, 4, 5]))));
    }

    #[test]
    fn uniform_links_favour_two_copies() {
        let grid = from_successes(6, &[(0, 1, 0.9), (1, 2, 0.9), (3, 4, 0.9), (4, 5, 0.9), (0, 3, 0.9), (1, 4, 0.9), (2, 5, 0.9)]);
        let r =
            evaluate_partitioning(&chain3(), &grid, AllocPolicy::default(), RoutePolicy::default(), &ErrorModel::new(&grid), None).unwrap();
        assert_eq!(r.pst_x, r.pst_y);
        assert_eq!(r.pst_x, r.stpt_one);
        assert_eq!(r.recommendation, Recommendation::TwoCopies);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn one_copy_dominates(s in arb_graph(8), seed in 0u64..1000) {
            let n = 2 + (seed as usize) % 2;
            prop_assume!(2 * n <= s.num_qubits());
            let c = generators::random(n, 12, seed);
            let model = ErrorModel::new(&s);
            let r = match evaluate_partitioning(&c, &s, AllocPolicy::default(), RoutePolicy::default(), &model, None) {
                Err(PartitionError::NoPartition(_)) => return Ok(()),
                other => other.unwrap(),
            };
            prop_assert!(r.stpt_one >= r.pst_x && r.pst_x >= r.pst_y);
            prop_assert!(r.stpt_two <= 2.0 * r.stpt_one);
            for (a, b) in enumerate_partitions(&s, n).unwrap() {
                for region in [a, b] {
                    let p = analytic_pst(&compile_on_region(&c, &s, &region, AllocPolicy::default(), RoutePolicy::default()).unwrap(), &model);
                    prop_assert!(r.stpt_one >= p);
                }
            }
        }
    }
}
