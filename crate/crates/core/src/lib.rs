//! Variation-aware compilation and reliability estimation for NISQ devices.
//!
//! A [`CalibrationSnapshot`] describes a device: its coupling graph with per-link
//! two-qubit error rates and per-qubit gate, readout and coherence data. The
//! [`compiler`] places a [`LogicalCircuit`] on the device and routes its CNOTs,
//! either variation-blind or preferring reliable qubits and links. The
//! [`reliability`] module scores the result analytically and by seeded Monte
//! Carlo, and [`partition`] weighs two concurrent copies against one.

pub mod allocator;
pub mod circuit;
pub mod compiler;
pub mod device;
pub mod partition;
pub mod reliability;
pub mod router;

pub use allocator::{allocate, estimated_swap_cost, select_strongest_subgraph, AllocError, AllocPolicy, Mapping};
pub use circuit::generators::GeneratorError;
pub use circuit::{
    circuit_stats, interaction_counts, parse_qasm, write_qasm, CircuitError, Instruction, LogicalCircuit, ProgramQubit, QasmError,
};
pub use compiler::{compile, compile_on_region, swap_overhead, verify_semantics, CompileError, PhysicalCircuit};
pub use device::{CalibrationSeries, CalibrationSnapshot, CouplingLink, DeviceError, QubitCalibration, QubitId};
pub use partition::{enumerate_partitions, evaluate_partitioning, PartitionError, Recommendation, RegionPair, StptReport};
pub use reliability::{analytic_mibf, analytic_pst, monte_carlo, ErrorModel, MetricClass, Mibf, MonteCarloConfig, TrialStats};
pub use router::{find_route, find_route_baseline, find_route_vqm, route_success_probability, CostModel, Route, RouteError, RoutePolicy};

/// Broad failure classes, stable enough to map onto process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Io,
    Parse,
    Validation,
    Capacity,
    Guard,
}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error(transparent)]
    Generator(#[from] GeneratorError),
    #[error(transparent)]
    Route(#[from] RouteError),
    #[error(transparent)]
    Alloc(#[from] AllocError),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
}

fn alloc_category(e: &AllocError) -> ErrorCategory {
    match e {
        AllocError::Capacity { .. } | AllocError::RegionSize { .. } => ErrorCategory::Capacity,
        AllocError::GuardExceeded { .. } => ErrorCategory::Guard,
        AllocError::FirstN | AllocError::InvalidMapping(_) => ErrorCategory::Validation,
    }
}

fn route_category(e: &RouteError) -> ErrorCategory {
    match e {
        RouteError::GuardExceeded { .. } => ErrorCategory::Guard,
        _ => ErrorCategory::Validation,
    }
}

fn device_category(e: &DeviceError) -> ErrorCategory {
    match e {
        DeviceError::Io(_) => ErrorCategory::Io,
        DeviceError::Parse(_) => ErrorCategory::Parse,
        _ => ErrorCategory::Validation,
    }
}

fn compile_category(e: &CompileError) -> ErrorCategory {
    match e {
        CompileError::Alloc(a) => alloc_category(a),
        CompileError::Route(r) => route_category(r),
        CompileError::Device(d) => device_category(d),
        CompileError::DisconnectedRegion(_) => ErrorCategory::Validation,
    }
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::Device(e) => device_category(e),
            Error::Qasm(QasmError::Circuit(_)) | Error::Circuit(_) | Error::Generator(_) => ErrorCategory::Validation,
            Error::Qasm(_) => ErrorCategory::Parse,
            Error::Route(e) => route_category(e),
            Error::Alloc(e) => alloc_category(e),
            Error::Compile(e) => compile_category(e),
            Error::Partition(e) => match e {
                PartitionError::Capacity { .. } | PartitionError::RegionTooSmall { .. } | PartitionError::NoPartition(_) => {
                    ErrorCategory::Capacity
                }
                PartitionError::Alloc(a) => alloc_category(a),
                PartitionError::Compile(c) => compile_category(c),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn categories() {
        assert_eq!(Error::from(DeviceError::Io("x".into())).category(), ErrorCategory::Io);
        assert_eq!(Error::from(QasmError::Syntax { line: 1, message: "x".into() }).category(), ErrorCategory::Parse);
        let cap = AllocError::Capacity { needed: 3, available: 2 };
        assert_eq!(Error::from(CompileError::Alloc(cap)).category(), ErrorCategory::Capacity);
        let guard = AllocError::GuardExceeded { k: 3, limit: 1 };
        assert_eq!(Error::from(PartitionError::Alloc(guard)).category(), ErrorCategory::Guard);
    }
}
