//! Fixtures shared by the benchmarks in `benches/`.

use fpgas_core::{Graph, QuboProblem};

/// Max-cut QUBO of the seeded connected G(n, 1/2) graph.
pub fn er_cut(n: usize, seed: u64) -> QuboProblem {
    Graph::erdos_renyi_connected(n, 0.5, seed)
        .expect("G(n, 1/2) is connected for some seed")
        .cut_problem()
}
