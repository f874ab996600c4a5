//! Logical circuits over program qubits.
//!
//! The IR is a strict instruction sequence: single-qubit gates, CNOTs and
//! measurements. Gate semantics are carried along only so circuits can be
//! written back out; reliability only cares about instruction class and location.

pub mod generators;
mod qasm;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::device::QubitId;

pub use qasm::{parse_qasm, write_qasm, QasmError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProgramQubit(pub usize);

impl ProgramQubit {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for ProgramQubit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q{}", self.0)
    }
}

/// Single-qubit gates of the accepted subset. All share one error-rate class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GateKind {
    H,
    X,
    Y,
    Z,
    S,
    T,
    Rx,
    Ry,
    Rz,
    U1,
    U2,
    U3,
}

impl GateKind {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "h" => Self::H,
            "x" => Self::X,
            "y" => Self::Y,
            "z" => Self::Z,
            "s" => Self::S,
            "t" => Self::T,
            "rx" => Self::Rx,
            "ry" => Self::Ry,
            "rz" => Self::Rz,
            "u1" => Self::U1,
            "u2" => Self::U2,
            "u3" => Self::U3,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::H => "h",
            Self::X => "x",
            Self::Y => "y",
            Self::Z => "z",
            Self::S => "s",
            Self::T => "t",
            Self::Rx => "rx",
            Self::Ry => "ry",
            Self::Rz => "rz",
            Self::U1 => "u1",
            Self::U2 => "u2",
            Self::U3 => "u3",
        }
    }

    pub fn num_params(self) -> usize {
        match self {
            Self::Rx | Self::Ry | Self::Rz | Self::U1 => 1,
            Self::U2 => 2,
            Self::U3 => 3,
            _ => 0,
        }
    }
}

/// A single-qubit gate with its angle parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Gate {
    pub kind: GateKind,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub params: Vec<f64>,
}

impl Gate {
    pub fn new(kind: GateKind) -> Self {
        Self { kind, params: Vec::new() }
    }

    pub fn with_params(kind: GateKind, params: Vec<f64>) -> Self {
        Self { kind, params }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Instruction {
    OneQubit { gate: Gate, qubit: ProgramQubit },
    TwoQubit { control: ProgramQubit, target: ProgramQubit },
    Measure { qubit: ProgramQubit, clbit: usize },
}

impl Instruction {
    pub fn gate(kind: GateKind, q: usize) -> Self {
        Self::OneQubit { gate: Gate::new(kind), qubit: ProgramQubit(q) }
    }

    pub fn cx(control: usize, target: usize) -> Self {
        Self::TwoQubit { control: ProgramQubit(control), target: ProgramQubit(target) }
    }

    pub fn measure(q: usize, clbit: usize) -> Self {
        Self::Measure { qubit: ProgramQubit(q), clbit }
    }

    pub fn qubits(&self) -> Vec<ProgramQubit> {
        match self {
            Self::OneQubit { qubit, .. } | Self::Measure { qubit, .. } => vec![*qubit],
            Self::TwoQubit { control, target } => vec![*control, *target],
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CircuitError {
    #[error("instruction {index} references {qubit} but the circuit declares {num_qubits} qubits")]
    QubitOutOfRange { index: usize, qubit: ProgramQubit, num_qubits: usize },
    #[error("instruction {index} references classical bit {clbit} but the circuit declares {num_clbits}")]
    ClbitOutOfRange { index: usize, clbit: usize, num_clbits: usize },
    #[error("instruction {index}: CNOT control and target are both {qubit}")]
    SameOperands { index: usize, qubit: ProgramQubit },
    #[error("instruction {index}: {gate} expects {expected} parameters, got {found}")]
    ParamCount { index: usize, gate: &'static str, expected: usize, found: usize },
}

/// An ordered instruction list over `num_qubits` program qubits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogicalCircuit {
    name: String,
    num_qubits: usize,
    num_clbits: usize,
    instructions: Vec<Instruction>,
}

impl LogicalCircuit {
    pub fn new(
        name: impl Into<String>,
        num_qubits: usize,
        num_clbits: usize,
        instructions: Vec<Instruction>,
    ) -> Result<Self, CircuitError> {
        for (index, instr) in instructions.iter().enumerate() {
            for qubit in instr.qubits() {
                if qubit.0 >= num_qubits {
                    return Err(CircuitError::QubitOutOfRange { index, qubit, num_qubits });
                }
            }
            match instr {
                Instruction::TwoQubit { control, target } if control == target => {
                    return Err(CircuitError::SameOperands { index, qubit: *control });
                }
                Instruction::Measure { clbit, .. } if *clbit >= num_clbits => {
                    return Err(CircuitError::ClbitOutOfRange { index, clbit: *clbit, num_clbits });
                }
                Instruction::OneQubit { gate, .. } if gate.params.len() != gate.kind.num_params() => {
                    return Err(CircuitError::ParamCount {
                        index,
                        gate: gate.kind.name(),
                        expected: gate.kind.num_params(),
                        found: gate.params.len(),
                    });
                }
                _ => {}
            }
        }
        Ok(Self { name: name.into(), num_qubits, num_clbits, instructions })
    }

    /// Circuit with one classical bit per qubit.
    pub fn with_measure_bits(name: impl Into<String>, num_qubits: usize, instructions: Vec<Instruction>) -> Result<Self, CircuitError> {
        Self::new(name, num_qubits, num_qubits, instructions)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn num_clbits(&self) -> usize {
        self.num_clbits
    }

    pub fn instructions(&self) -> &[Instruction] {
        &self.instructions
    }

    pub fn len(&self) -> usize {
        self.instructions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instructions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct CircuitStats {
    pub total: usize,
    pub one_qubit: usize,
    pub two_qubit: usize,
    pub measure: usize,
}

pub fn circuit_stats(circuit: &LogicalCircuit) -> CircuitStats {
    circuit.instructions().iter().fold(CircuitStats::default(), |mut acc, instr| {
        acc.total += 1;
        match instr {
            Instruction::OneQubit { .. } => acc.one_qubit += 1,
            Instruction::TwoQubit { .. } => acc.two_qubit += 1,
            Instruction::Measure { .. } => acc.measure += 1,
        }
        acc
    })
}

/// Symmetric count of CNOTs per unordered program-qubit pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InteractionCounts {
    n: usize,
    counts: Vec<u32>,
}

impl InteractionCounts {
    pub fn zeros(n: usize) -> Self {
        Self { n, counts: vec![0; n * n] }
    }

    pub fn num_qubits(&self) -> usize {
        self.n
    }

    pub fn get(&self, a: ProgramQubit, b: ProgramQubit) -> u32 {
        self.counts[a.0 * self.n + b.0]
    }

    fn bump(&mut self, a: ProgramQubit, b: ProgramQubit) {
        self.counts[a.0 * self.n + b.0] += 1;
        self.counts[b.0 * self.n + a.0] += 1;
    }

    /// Total interactions of `q` with every other qubit.
    pub fn weight(&self, q: ProgramQubit) -> u32 {
        self.counts[q.0 * self.n..(q.0 + 1) * self.n].iter().sum()
    }

    /// Non-zero pairs `(a, b, count)` with `a < b`.
    pub fn pairs(&self) -> Vec<(ProgramQubit, ProgramQubit, u32)> {
        let mut out = Vec::new();
        for a in 0..self.n {
            for b in a + 1..self.n {
                let c = self.counts[a * self.n + b];
                if c > 0 {
                    out.push((ProgramQubit(a), ProgramQubit(b), c));
                }
            }
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.counts.iter().all(|&c| c == 0)
    }
}

/// Count CNOTs per pair among the first `first_n` instructions (`None` = all).
/// Every instruction kind counts toward the prefix length.
pub fn interaction_counts(circuit: &LogicalCircuit, first_n: Option<usize>) -> InteractionCounts {
    let mut counts = InteractionCounts::zeros(circuit.num_qubits());
    let limit = first_n.unwrap_or(usize::MAX);
    for instr in circuit.instructions().iter().take(limit) {
        if let Instruction::TwoQubit { control, target } = instr {
            counts.bump(*control, *target);
        }
    }
    counts
}

/// A CNOT between two physical qubits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhysicalCnot {
    pub control: QubitId,
    pub target: QubitId,
}

/// SWAP(a, b) as three alternating CNOTs.
pub fn decompose_swap(a: QubitId, b: QubitId) -> [PhysicalCnot; 3] {
    [PhysicalCnot { control: a, target: b }, PhysicalCnot { control: b, target: a }, PhysicalCnot { control: a, target: b }]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn chain() -> LogicalCircuit {
        LogicalCircuit::with_measure_bits("c", 3, vec![Instruction::cx(0, 1), Instruction::cx(0, 1), Instruction::cx(1, 2)]).unwrap()
    }

    #[test]
    fn interaction_counts_by_prefix() {
        let c = chain();
        let all = interaction_counts(&c, None);
        let (q0, q1, q2) = (ProgramQubit(0), ProgramQubit(1), ProgramQubit(2));
        assert_eq!(all.get(q0, q1), 2);
        assert_eq!(all.get(q1, q0), 2);
        assert_eq!(all.get(q1, q2), 1);
        assert_eq!(all.get(q0, q2), 0);
        let two = interaction_counts(&c, Some(2));
        assert_eq!(two.pairs(), vec![(q0, q1, 2)]);
        assert!(interaction_counts(&c, Some(0)).is_zero());
    }

    #[test]
    fn one_qubit_only_gives_zero_matrix() {
        let c =
            LogicalCircuit::with_measure_bits("h", 2, vec![Instruction::gate(GateKind::H, 0), Instruction::gate(GateKind::X, 1)]).unwrap();
        assert!(interaction_counts(&c, None).is_zero());
    }

    #[test]
    fn stats_partition_instructions() {
        let empty = LogicalCircuit::with_measure_bits("e", 1, vec![]).unwrap();
        assert_eq!(circuit_stats(&empty), CircuitStats::default());
        let c = LogicalCircuit::with_measure_bits(
            "m",
            2,
            vec![Instruction::cx(0, 1), Instruction::gate(GateKind::H, 0), Instruction::measure(1, 1)],
        )
        .unwrap();
        assert_eq!(circuit_stats(&c), CircuitStats { total: 3, one_qubit: 1, two_qubit: 1, measure: 1 });
    }

    #[test]
    fn validation_errors() {
        assert!(matches!(
            LogicalCircuit::with_measure_bits("x", 2, vec![Instruction::cx(0, 2)]),
            Err(CircuitError::QubitOutOfRange { .. })
        ));
        assert!(matches!(LogicalCircuit::with_measure_bits("x", 2, vec![Instruction::cx(1, 1)]), Err(CircuitError::SameOperands { .. })));
        assert!(matches!(LogicalCircuit::new("x", 2, 1, vec![Instruction::measure(1, 1)]), Err(CircuitError::ClbitOutOfRange { .. })));
        assert!(matches!(
            LogicalCircuit::with_measure_bits("x", 1, vec![Instruction::gate(GateKind::Rz, 0)]),
            Err(CircuitError::ParamCount { .. })
        ));
    }

    #[test]
    fn swap_is_three_alternating_cnots() {
        let cnots = decompose_swap(QubitId(3), QubitId(4));
        assert_eq!(cnots.len(), 3);
        let pairs: Vec<(usize, usize)> = cnots.iter().map(|c| (c.control.0, c.target.0)).collect();
        assert_eq!(pairs, vec![(3, 4), (4, 3), (3, 4)]);
    }

    /// Tracked-label oracle: each wire holds a GF(2) combination of the original
    /// labels; a CNOT XORs the control's combination into the target.
    #[test]
    fn swap_exchanges_labels() {
        for (a, b) in [(0usize, 1usize), (3, 4), (7, 2)] {
            let mut wires: Vec<u32> = (0..8).map(|i| 1 << i).collect();
            for c in decompose_swap(QubitId(a), QubitId(b)) {
                wires[c.target.0] ^= wires[c.control.0];
            }
            for (i, &w) in wires.iter().enumerate() {
                let expected = if i == a {
                    1 << b
                } else if i == b {
                    1 << a
                } else {
                    1 << i
                };
                assert_eq!(w, expected);
            }
        }
    }
}
