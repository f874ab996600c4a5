//! Generated benchmark circuits.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Gate, GateKind, Instruction, LogicalCircuit, ProgramQubit};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeneratorError {
    #[error("unknown generator '{0}' (expected qft, ising, random, crossing or shuttle)")]
    Unknown(String),
    #[error("bad generator spec '{spec}': {reason}")]
    Spec { spec: String, reason: String },
}

fn rot(kind: GateKind, q: usize, angle: f64) -> Instruction {
    Instruction::OneQubit { gate: Gate::with_params(kind, vec![angle]), qubit: ProgramQubit(q) }
}

fn measure_all(instrs: &mut Vec<Instruction>, n: usize) {
    instrs.extend((0..n).map(|q| Instruction::measure(q, q)));
}

/// Quantum Fourier transform on `n` qubits followed by measurement.
/// Each controlled phase is four instructions, so the total is `2 n^2`.
pub fn qft(n: usize) -> LogicalCircuit {
    let mut instrs = Vec::with_capacity(2 * n * n);
    for t in 0..n {
        instrs.push(Instruction::gate(GateKind::H, t));
        for c in t + 1..n {
            let half = PI / f64::powi(2.0, (c - t) as i32) / 2.0;
            instrs.push(rot(GateKind::U1, t, half));
            instrs.push(Instruction::cx(c, t));
            instrs.push(rot(GateKind::U1, t, -half));
            instrs.push(Instruction::cx(c, t));
        }
    }
    measure_all(&mut instrs, n);
    LogicalCircuit::with_measure_bits(format!("qft-{n}"), n, instrs).expect("generated circuit is valid")
}

/// Transverse-field Ising evolution on a chain: `n` Hadamards, then `steps`
/// rounds of nearest-neighbour ZZ couplings and an `rx` layer. No measurement.
/// Total is `n + steps (4n - 3)`.
pub fn ising(n: usize, steps: usize) -> LogicalCircuit {
    let mut instrs: Vec<Instruction> = (0..n).map(|q| Instruction::gate(GateKind::H, q)).collect();
    for _ in 0..steps {
        for q in 0..n.saturating_sub(1) {
            instrs.push(Instruction::cx(q, q + 1));
            instrs.push(rot(GateKind::Rz, q + 1, 0.2));
            instrs.push(Instruction::cx(q, q + 1));
        }
        for q in 0..n {
            instrs.push(rot(GateKind::Rx, q, 0.1));
        }
    }
    LogicalCircuit::with_measure_bits(format!("ising-{n}"), n, instrs).expect("generated circuit is valid")
}

/// `gates` random instructions (half CNOTs on average) plus final measurement.
pub fn random(n: usize, gates: usize, seed: u64) -> LogicalCircuit {
    assert!(n >= 2, "random circuits need at least two qubits");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let one_qubit = [GateKind::H, GateKind::X, GateKind::T, GateKind::S];
    let mut instrs = Vec::with_capacity(gates + n);
    for _ in 0..gates {
        if rng.random_bool(0.5) {
            let c = rng.random_range(0..n);
            let t = (c + rng.random_range(1..n)) % n;
            instrs.push(Instruction::cx(c, t));
        } else if rng.random_bool(0.25) {
            let q = rng.random_range(0..n);
            instrs.push(rot(GateKind::Rz, q, rng.random_range(-PI..PI)));
        } else {
            let kind = one_qubit[rng.random_range(0..one_qubit.len())];
            instrs.push(Instruction::gate(kind, rng.random_range(0..n)));
        }
    }
    measure_all(&mut instrs, n);
    LogicalCircuit::with_measure_bits(format!("random-{n}-{gates}-s{seed}"), n, instrs).expect("generated circuit is valid")
}

/// `reps` rounds of `cx(a, b)` between two chosen program qubits, bracketed by
/// Hadamards and measurement. Placed so that `a` and `b` straddle a poor link,
/// it isolates the cost of using that link.
pub fn crossing(n: usize, a: usize, b: usize, reps: usize) -> LogicalCircuit {
    assert!(a < n && b < n && a != b, "crossing endpoints must be distinct qubits below {n}");
    let mut instrs = vec![Instruction::gate(GateKind::H, a)];
    for r in 0..reps {
        instrs.push(Instruction::cx(a, b));
        instrs.push(rot(GateKind::Rz, b, 0.1 * (r + 1) as f64));
    }
    measure_all(&mut instrs, n);
    LogicalCircuit::with_measure_bits(format!("crossing-{n}-{a}-{b}x{reps}"), n, instrs).expect("generated circuit is valid")
}

/// `reps` rounds of `cx(a, b)` then `cx(a, c)`. With `b` and `c` on opposite
/// sides of a link next to `a`, every gate moves `a` back across it.
pub fn shuttle(n: usize, a: usize, b: usize, c: usize, reps: usize) -> LogicalCircuit {
    assert!(a < n && b < n && c < n && a != b && a != c && b != c, "shuttle qubits must be distinct and below {n}");
    let mut instrs = vec![Instruction::gate(GateKind::H, a)];
    for r in 0..reps {
        let angle = 0.1 * (r + 1) as f64;
        instrs.push(Instruction::cx(a, b));
        instrs.push(rot(GateKind::Rz, b, angle));
        instrs.push(Instruction::cx(a, c));
        instrs.push(rot(GateKind::Rz, c, angle));
    }
    measure_all(&mut instrs, n);
    LogicalCircuit::with_measure_bits(format!("shuttle-{n}-{a}-{b}-{c}x{reps}"), n, instrs).expect("generated circuit is valid")
}

/// Benchmarks sized like a common NISQ evaluation set: QFT, Ising, and random
/// circuits matching the qubit and instruction counts of the remaining entries.
/// The last five are long enough that they essentially never finish error-free.
pub fn standard_suite() -> Vec<LogicalCircuit> {
    let mut suite = vec![qft(16), ising(20, 10)];
    let sizes = [(20, 173), (16, 384), (20, 1000), (14, 39000), (16, 10000), (16, 38000), (13, 7000), (20, 28000)];
    for (i, &(n, total)) in sizes.iter().enumerate() {
        suite.push(random(n, total - n, i as u64 + 1));
    }
    suite
}

/// Build a circuit from a compact spec:
/// `qft:N`, `ising:N:STEPS`, `random:N:GATES:SEED`, `crossing:N:A:B:REPS`,
/// `shuttle:N:A:B:C:REPS`.
pub fn from_spec(spec: &str) -> Result<LogicalCircuit, GeneratorError> {
    let mut parts = spec.split(':');
    let kind = parts.next().unwrap_or_default();
    let args: Vec<usize> = parts
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|e| GeneratorError::Spec { spec: spec.to_string(), reason: e.to_string() })?;
    let bad = |reason: &str| GeneratorError::Spec { spec: spec.to_string(), reason: reason.to_string() };
    match (kind, args.as_slice()) {
        ("qft", &[n]) if n >= 1 => Ok(qft(n)),
        ("ising", &[n, steps]) if n >= 2 => Ok(ising(n, steps)),
        ("random", &[n, gates, seed]) if n >= 2 => Ok(random(n, gates, seed as u64)),
        ("crossing", &[n, a, b, reps]) if a < n && b < n && a != b => Ok(crossing(n, a, b, reps)),
        ("shuttle", &[n, a, b, c, reps]) if a < n && b < n && c < n && a != b && a != c && b != c => Ok(shuttle(n, a, b, c, reps)),
        ("qft", _) => Err(bad("expected qft:N with N >= 1")),
        ("ising", _) => Err(bad("expected ising:N:STEPS with N >= 2")),
        ("random", _) => Err(bad("expected random:N:GATES:SEED with N >= 2")),
        ("crossing", _) => Err(bad("expected crossing:N:A:B:REPS with distinct A, B < N")),
        ("shuttle", _) => Err(bad("expected shuttle:N:A:B:C:REPS with distinct A, B, C < N")),
        (other, _) => Err(GeneratorError::Unknown(other.to_string())),
    }
}
