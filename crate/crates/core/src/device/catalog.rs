//! Small hand-built devices with ideal qubits, used as worked examples.

use super::{CalibrationSnapshot, CouplingLink, QubitCalibration};

fn ideal_device(name: &str, n: usize, links: &[(usize, usize, f64)]) -> CalibrationSnapshot {
    let links = links.iter().map(|&(u, v, e)| CouplingLink::new(u, v, e)).collect();
    CalibrationSnapshot::new(name, "example", vec![QubitCalibration::ideal(); n], links).expect("catalog devices are valid")
}

/// Five qubits A..E on a ring. The direct A-B-C path has success 0.6 * 0.7,
/// the detour A-E-D-C has 0.9 * 0.9 * 0.7.
pub fn five_qubit_ring() -> CalibrationSnapshot {
    ideal_device("ring-5", 5, &[(0, 1, 0.4), (1, 2, 0.3), (2, 3, 0.3), (3, 4, 0.1), (4, 0, 0.1)])
}

/// Rows A B / D C / E F, indexed A0 B1 C2 D3 E4 F5. D-C is the best link and
/// D has connectivity strength 2.4.
pub fn six_qubit_grid() -> CalibrationSnapshot {
    ideal_device("grid-6", 6, &[(0, 1, 0.2), (0, 3, 0.2), (1, 2, 0.15), (3, 2, 0.1), (3, 4, 0.3), (2, 5, 0.2), (4, 5, 0.25)])
}

/// Rows A B / C D / E F, indexed A0 B1 C2 D3 E4 F5. Splits into a strong
/// column B-D-F and a weak column A-C-E joined by the strong C-D link.
pub fn six_qubit_mesh() -> CalibrationSnapshot {
    ideal_device("mesh-6", 6, &[(1, 3, 0.2), (3, 5, 0.6), (0, 2, 0.6), (2, 4, 0.7), (0, 1, 0.7), (4, 5, 0.7), (2, 3, 0.1)])
}
