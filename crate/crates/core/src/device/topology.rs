use serde::{Deserialize, Serialize};

/// Qubit count and undirected edge list, without calibration values.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Topology {
    pub num_qubits: usize,
    pub edges: Vec<(usize, usize)>,
}

impl Topology {
    pub fn new(num_qubits: usize, mut edges: Vec<(usize, usize)>) -> Self {
        for e in &mut edges {
            if e.0 > e.1 {
                *e = (e.1, e.0);
            }
        }
        edges.sort_unstable();
        edges.dedup();
        Self { num_qubits, edges }
    }

    /// 20-qubit layout in the style of IBM-Q20: a 4x5 mesh (rows Q0-Q4, Q5-Q9,
    /// Q10-Q14, Q15-Q19) plus seven cross links, 38 undirected links in total.
    /// Includes the Q0-Q1 and Q14-Q18 links.
    pub fn ibm_q20() -> Self {
        let mut edges = Vec::new();
        for r in 0..4 {
            for c in 0..4 {
                edges.push((5 * r + c, 5 * r + c + 1));
            }
        }
        for r in 0..3 {
            for c in 0..5 {
                edges.push((5 * r + c, 5 * (r + 1) + c));
            }
        }
        edges.extend([(1, 7), (2, 6), (3, 9), (4, 8), (11, 17), (12, 16), (14, 18)]);
        Self::new(20, edges)
    }

    /// Rectangular mesh, row-major numbering.
    pub fn grid(rows: usize, cols: usize) -> Self {
        let mut edges = Vec::new();
        for r in 0..rows {
            for c in 0..cols {
                let q = r * cols + c;
                if c + 1 < cols {
                    edges.push((q, q + 1));
                }
                if r + 1 < rows {
                    edges.push((q, q + cols));
                }
            }
        }
        Self::new(rows * cols, edges)
    }

    pub fn line(n: usize) -> Self {
        Self::new(n, (1..n).map(|i| (i - 1, i)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ibm_q20_shape() {
        let t = Topology::ibm_q20();
        assert_eq!(t.num_qubits, 20);
        assert_eq!(t.edges.len(), 38);
        assert!(t.edges.contains(&(14, 18)));
        assert!(t.edges.contains(&(0, 1)));
    }

    #[test]
    fn grid_edge_count() {
        assert_eq!(Topology::grid(3, 2).edges.len(), 7);
        assert_eq!(Topology::grid(4, 5).edges.len(), 31);
        assert_eq!(Topology::line(4).edges, vec![(0, 1), (1, 2), (2, 3)]);
    }
}
