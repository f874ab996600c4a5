//! Allocation plus per-gate routing into a physical instruction stream.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::allocator::{allocate, AllocError, AllocPolicy, Mapping};
use crate::circuit::{decompose_swap, Gate, Instruction, LogicalCircuit};
use crate::device::{CalibrationSnapshot, DeviceError, QubitId};
use crate::router::{find_route, RouteError, RoutePolicy};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CompileError {
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error("region {0:?} is not connected")]
    DisconnectedRegion(Vec<QubitId>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Origin {
    Original,
    RoutingSwap,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PhysicalOp {
    OneQubit { gate: Gate, qubit: QubitId },
    Cnot { control: QubitId, target: QubitId },
    Measure { qubit: QubitId, clbit: usize },
}

impl PhysicalOp {
    fn relabel(&self, map: &[QubitId]) -> Self {
        match self {
            PhysicalOp::OneQubit { gate, qubit } => PhysicalOp::OneQubit { gate: gate.clone(), qubit: map[qubit.0] },
            PhysicalOp::Cnot { control, target } => PhysicalOp::Cnot { control: map[control.0], target: map[target.0] },
            PhysicalOp::Measure { qubit, clbit } => PhysicalOp::Measure { qubit: map[qubit.0], clbit: *clbit },
        }
    }
}

/// One executed operation with the raw failure probability of its location.
/// Measurement carries the readout error whether or not it is later counted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalInstruction {
    pub op: PhysicalOp,
    pub failure_prob: f64,
    pub origin: Origin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalCircuit {
    name: String,
    snapshot_label: String,
    num_physical: usize,
    num_clbits: usize,
    alloc_policy: AllocPolicy,
    route_policy: RoutePolicy,
    initial_mapping: Mapping,
    final_mapping: Mapping,
    instructions: Vec<PhysicalInstruction>,
    original_count: usize,
    inserted_swap_count: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SwapOverhead {
    pub inserted_swaps: usize,
    pub inserted_cnots: usize,
    pub original_two_qubit: usize,
    /// Inserted two-qubit operations per original two-qubit operation.
    pub overhead_ratio: f64,
}

/// Structured companion to the physical QASM text.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhysicalReport {
    pub name: String,
    pub snapshot_label: String,
    pub alloc_policy: AllocPolicy,
    pub route_policy: RoutePolicy,
    pub initial_mapping: Vec<QubitId>,
    pub final_mapping: Vec<QubitId>,
    pub original_count: usize,
    pub inserted_swap_count: usize,
    pub inserted_cnot_count: usize,
    pub failure_probs: Vec<f64>,
    pub origins: Vec<Origin>,
}

impl PhysicalCircuit {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn snapshot_label(&self) -> &str {
        &self.snapshot_label
    }

    pub fn num_physical(&self) -> usize {
        self.num_physical
    }

    pub fn instructions(&self) -> &[PhysicalInstruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }

    pub fn initial_mapping(&self) -> &Mapping {
        &self.initial_mapping
    }

    pub fn final_mapping(&self) -> &Mapping {
        &self.final_mapping
    }

    pub fn original_count(&self) -> usize {
        self.original_count
    }

    pub fn inserted_swap_count(&self) -> usize {
        self.inserted_swap_count
    }

    pub fn alloc_policy(&self) -> AllocPolicy {
        self.alloc_policy
    }

    pub fn route_policy(&self) -> RoutePolicy {
        self.route_policy
    }

    /// Move onto a larger device through `map` (index = current physical id).
    pub fn relabel(&self, map: &[QubitId], num_physical: usize) -> Result<Self, AllocError> {
        Ok(Self {
            num_physical,
            initial_mapping: self.initial_mapping.relabel(map, num_physical)?,
            final_mapping: self.final_mapping.relabel(map, num_physical)?,
            instructions: self.instructions.iter().map(|i| PhysicalInstruction { op: i.op.relabel(map), ..i.clone() }).collect(),
            ..self.clone()
        })
    }

    /// Check every CNOT sits on a link and every failure probability matches `snapshot`.
    pub fn check_against(&self, snapshot: &CalibrationSnapshot) -> Result<(), String> {
        for (i, instr) in self.instructions.iter().enumerate() {
            let expected = match &instr.op {
                PhysicalOp::Cnot { control, target } => match snapshot.link_between(*control, *target) {
                    Some(link) => link.two_qubit_error,
                    None => return Err(format!("instruction {i}: CNOT {control}->{target} is not on a link")),
                },
                PhysicalOp::OneQubit { qubit, .. } => snapshot.qubit(*qubit).single_qubit_error,
                PhysicalOp::Measure { qubit, .. } => snapshot.qubit(*qubit).readout_error,
            };
            if instr.failure_prob != expected {
                return Err(format!("instruction {i}: failure probability {} but snapshot says {expected}", instr.failure_prob));
            }
        }
        Ok(())
    }

    pub fn to_qasm(&self) -> String {
        let mut out = String::new();
        writeln!(out, "// {} on {}", self.name, self.snapshot_label).unwrap();
        out.push_str("OPENQASM 2.0;\ninclude \"qelib1.inc\";\n");
        writeln!(out, "qreg q[{}];", self.num_physical).unwrap();
        if self.num_clbits > 0 {
            writeln!(out, "creg c[{}];", self.num_clbits).unwrap();
        }
        for instr in &self.instructions {
            match &instr.op {
                PhysicalOp::OneQubit { gate, qubit } => {
                    out.push_str(gate.kind.name());
                    if !gate.params.is_empty() {
                        let params: Vec<String> = gate.params.iter().map(|p| format!("{p:?}")).collect();
                        write!(out, "({})", params.join(",")).unwrap();
                    }
                    writeln!(out, " q[{}];", qubit.0).unwrap();
                }
                PhysicalOp::Cnot { control, target } => writeln!(out, "cx q[{}],q[{}];", control.0, target.0).unwrap(),
                PhysicalOp::Measure { qubit, clbit } => writeln!(out, "measure q[{}] -> c[{clbit}];", qubit.0).unwrap(),
            }
        }
        out
    }

    pub fn report(&self) -> PhysicalReport {
        PhysicalReport {
            name: self.name.clone(),
            snapshot_label: self.snapshot_label.clone(),
            alloc_policy: self.alloc_policy,
            route_policy: self.route_policy,
            initial_mapping: self.initial_mapping.forward().to_vec(),
            final_mapping: self.final_mapping.forward().to_vec(),
            original_count: self.original_count,
            inserted_swap_count: self.inserted_swap_count,
            inserted_cnot_count: 3 * self.inserted_swap_count,
            failure_probs: self.instructions.iter().map(|i| i.failure_prob).collect(),
            origins: self.instructions.iter().map(|i| i.origin).collect(),
        }
    }
}

/// Allocate, then walk the program in order. A CNOT on non-adjacent qubits moves
/// the control along the chosen route by SWAPs and runs on the route's last edge.
pub fn compile(
    circuit: &LogicalCircuit,
    snapshot: &CalibrationSnapshot,
    alloc_policy: AllocPolicy,
    route_policy: RoutePolicy,
) -> Result<PhysicalCircuit, CompileError> {
    let initial = allocate(circuit, snapshot, alloc_policy)?;
    let mut mapping = initial.clone();
    let mut out = Vec::with_capacity(circuit.len());
    let mut swaps = 0;
    let link_error = |a: QubitId, b: QubitId| snapshot.link_between(a, b).map(|l| l.two_qubit_error);

    for instr in circuit.instructions() {
        match instr {
            Instruction::OneQubit { gate, qubit } => {
                let q = mapping.physical(*qubit);
                out.push(PhysicalInstruction {
                    op: PhysicalOp::OneQubit { gate: gate.clone(), qubit: q },
                    failure_prob: snapshot.qubit(q).single_qubit_error,
                    origin: Origin::Original,
                });
            }
            Instruction::Measure { qubit, clbit } => {
                let q = mapping.physical(*qubit);
                out.push(PhysicalInstruction {
                    op: PhysicalOp::Measure { qubit: q, clbit: *clbit },
                    failure_prob: snapshot.qubit(q).readout_error,
                    origin: Origin::Original,
                });
            }
            Instruction::TwoQubit { control, target } => {
                let (pc, pt) = (mapping.physical(*control), mapping.physical(*target));
                if !snapshot.are_adjacent(pc, pt) {
                    let route = find_route(snapshot, pc, pt, route_policy)?;
                    let path = route.path();
                    for w in path[..path.len() - 1].windows(2) {
                        let e = link_error(w[0], w[1]).ok_or(RouteError::NotAdjacent(w[0], w[1]))?;
                        for cnot in decompose_swap(w[0], w[1]) {
                            out.push(PhysicalInstruction {
                                op: PhysicalOp::Cnot { control: cnot.control, target: cnot.target },
                                failure_prob: e,
                                origin: Origin::RoutingSwap,
                            });
                        }
                        mapping.swap_physical(w[0], w[1]);
                        swaps += 1;
                    }
                }
                let (pc, pt) = (mapping.physical(*control), mapping.physical(*target));
                let e = link_error(pc, pt).ok_or(RouteError::NotAdjacent(pc, pt))?;
                out.push(PhysicalInstruction {
                    op: PhysicalOp::Cnot { control: pc, target: pt },
                    failure_prob: e,
                    origin: Origin::Original,
                });
            }
        }
    }

    Ok(PhysicalCircuit {
        name: circuit.name().to_string(),
        snapshot_label: snapshot.label().to_string(),
        num_physical: snapshot.num_qubits(),
        num_clbits: circuit.num_clbits(),
        alloc_policy,
        route_policy,
        initial_mapping: initial,
        final_mapping: mapping,
        instructions: out,
        original_count: circuit.len(),
        inserted_swap_count: swaps,
    })
}

/// Compile onto the sub-device induced by `region`, reported in the full device's ids.
pub fn compile_on_region(
    circuit: &LogicalCircuit,
    snapshot: &CalibrationSnapshot,
    region: &[QubitId],
    alloc_policy: AllocPolicy,
    route_policy: RoutePolicy,
) -> Result<PhysicalCircuit, CompileError> {
    if !snapshot.is_connected_subset(region) {
        return Err(CompileError::DisconnectedRegion(region.to_vec()));
    }
    let (sub, map) = snapshot.induced(region)?;
    let physical = compile(circuit, &sub, alloc_policy, route_policy)?;
    Ok(physical.relabel(&map, snapshot.num_qubits())?)
}

pub fn swap_overhead(physical: &PhysicalCircuit) -> SwapOverhead {
    let original_two_qubit =
        physical.instructions.iter().filter(|i| i.origin == Origin::Original && matches!(i.op, PhysicalOp::Cnot { .. })).count();
    let inserted_cnots = 3 * physical.inserted_swap_count;
    let overhead_ratio = if original_two_qubit == 0 { 0.0 } else { inserted_cnots as f64 / original_two_qubit as f64 };
    SwapOverhead { inserted_swaps: physical.inserted_swap_count, inserted_cnots, original_two_qubit, overhead_ratio }
}

/// GF(2) combination of program-qubit labels held by one wire.
#[derive(Debug, Clone, PartialEq, Eq)]
struct Label(Vec<u64>);

impl Label {
    fn empty(n: usize) -> Self {
        Label(vec![0; n.div_ceil(64).max(1)])
    }

    fn single(n: usize, p: usize) -> Self {
        let mut l = Self::empty(n);
        l.0[p / 64] |= 1 << (p % 64);
        l
    }

    fn xor(&mut self, other: &Label) {
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a ^= b;
        }
    }
}

/// Replay the permutation induced by routing CNOTs and confirm each original
/// instruction acts on the wires holding its logical operands, in order, and
/// that the final layout matches the reported mapping.
pub fn check_semantics(logical: &LogicalCircuit, physical: &PhysicalCircuit) -> Result<(), String> {
    let n = logical.num_qubits();
    let holds = |label: &Label, p: usize| *label == Label::single(n, p);
    let mut wires: Vec<Label> = (0..physical.num_physical)
        .map(|q| match physical.initial_mapping.program(QubitId(q)) {
            Some(p) => Label::single(n, p.0),
            None => Label::empty(n),
        })
        .collect();
    let mut expected = logical.instructions().iter().enumerate();

    for (i, instr) in physical.instructions.iter().enumerate() {
        if instr.origin == Origin::RoutingSwap {
            let PhysicalOp::Cnot { control, target } = &instr.op else {
                return Err(format!("instruction {i}: routing instruction is not a CNOT"));
            };
            let c = wires[control.0].clone();
            wires[target.0].xor(&c);
            continue;
        }
        let Some((j, want)) = expected.next() else {
            return Err(format!("instruction {i}: more original instructions than the program has"));
        };
        let ok = match (want, &instr.op) {
            (Instruction::OneQubit { gate, qubit }, PhysicalOp::OneQubit { gate: g, qubit: q }) => gate == g && holds(&wires[q.0], qubit.0),
            (Instruction::Measure { qubit, clbit }, PhysicalOp::Measure { qubit: q, clbit: c }) => {
                clbit == c && holds(&wires[q.0], qubit.0)
            }
            (Instruction::TwoQubit { control, target }, PhysicalOp::Cnot { control: c, target: t }) => {
                holds(&wires[c.0], control.0) && holds(&wires[t.0], target.0)
            }
            _ => false,
        };
        if !ok {
            return Err(format!("instruction {i} ({:?}) does not realise program instruction {j} ({want:?})", instr.op));
        }
    }
    if let Some((j, _)) = expected.next() {
        return Err(format!("program instruction {j} was never emitted"));
    }
    for p in 0..n {
        let q = physical.final_mapping.physical(crate::circuit::ProgramQubit(p));
        if !holds(&wires[q.0], p) {
            return Err(format!("final mapping places q{p} on {q}, which holds something else"));
        }
    }
    Ok(())
}

pub fn verify_semantics(logical: &LogicalCircuit, physical: &PhysicalCircuit) -> bool {
    check_semantics(logical, physical).is_ok()
}
