//! Resource accounting with as-soon-as-possible layering.
//!
//! Macro gates are charged what their lowering costs: `Fanout` as its CNOT
//! tree, `Qft`/`Iqft` per the [`QftModel`], `Mcx` per the [`McxDepth`] model and
//! `McPhase` on three or more qubits as `MCX · Phase · MCX` through an ancilla.
//! `CPhase(θ)` is charged as `CNOT · Rz(θ/2) · CNOT` with the two single-qubit
//! `θ/2` corrections merged into neighbouring layers: two rotations, two CNOTs,
//! depth three, non-Clifford whenever `θ/2` is not a multiple of `π/2`.

use std::collections::{BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

use super::lower::{fanout_tree, iqft_gates, qft_gates};
use super::{is_clifford_angle, Circuit, Gate};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum QftModel {
    /// Exact textbook decomposition including swaps.
    Textbook,
    /// Controlled rotations finer than `2π/2^max_order` dropped.
    Approximate { max_order: usize },
}

/// Depth charged for a `k`-control MCX with `k ≥ 2`: `constant + per_log·⌈log₂ k⌉`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct McxDepth {
    pub constant: usize,
    pub per_log: usize,
}

impl Default for McxDepth {
    fn default() -> Self {
        McxDepth {
            constant: 1,
            per_log: 2,
        }
    }
}

impl McxDepth {
    pub fn depth(&self, controls: usize) -> usize {
        if controls <= 1 {
            1
        } else {
            self.constant + self.per_log * ceil_log2(controls)
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub qft: QftModel,
    pub mcx: McxDepth,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            qft: QftModel::Textbook,
            mcx: McxDepth::default(),
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResourceReport {
    pub total_depth: usize,
    pub rz_depth: usize,
    pub rz_count: usize,
    pub cnot_count: usize,
    pub non_clifford_count: usize,
    pub qubit_count: usize,
    pub max_qubit_degree: usize,
    pub gate_count: usize,
}

pub(crate) fn ceil_log2(k: usize) -> usize {
    if k <= 1 {
        0
    } else {
        (usize::BITS - (k - 1).leading_zeros()) as usize
    }
}

/// Cost of one gate in isolation.
#[derive(Clone, Debug, Default)]
struct GateCost {
    duration: usize,
    /// Time steps, relative to the gate start, in which a counted rotation runs.
    rz_steps: Vec<usize>,
    rz: usize,
    cnot: usize,
    non_clifford: usize,
}

fn gate_cost(gate: &Gate, model: &CostModel) -> GateCost {
    match gate {
        Gate::GlobalPhase { .. } => GateCost::default(),
        Gate::H { .. } | Gate::X { .. } => GateCost {
            duration: 1,
            ..Default::default()
        },
        Gate::Cnot { .. } => GateCost {
            duration: 1,
            cnot: 1,
            ..Default::default()
        },
        Gate::Phase { angle, .. } => rotation_cost(*angle),
        Gate::CPhase { angle, .. } => cphase_cost(*angle),
        Gate::Fanout { control, targets } => sequence_cost(&fanout_tree(*control, targets), model),
        Gate::Qft { qubits } => sequence_cost(&qft_gates(qubits, max_order(model)), model),
        Gate::Iqft { qubits } => sequence_cost(&iqft_gates(qubits, max_order(model)), model),
        Gate::Mcx { controls, .. } => mcx_cost(controls.len(), model),
        Gate::McPhase { qubits, angle } => match qubits.len() {
            1 => rotation_cost(*angle),
            2 => cphase_cost(*angle),
            k => {
                let mcx = mcx_cost(k, model);
                let rot = rotation_cost(*angle);
                GateCost {
                    duration: 2 * mcx.duration + 1,
                    rz_steps: if rot.rz > 0 { vec![mcx.duration] } else { vec![] },
                    rz: rot.rz,
                    cnot: 2 * mcx.cnot,
                    non_clifford: 2 * mcx.non_clifford + rot.non_clifford,
                }
            }
        },
    }
}

fn max_order(model: &CostModel) -> Option<usize> {
    match model.qft {
        QftModel::Textbook => None,
        QftModel::Approximate { max_order } => Some(max_order),
    }
}

fn rotation_cost(angle: f64) -> GateCost {
    let counted = !is_clifford_angle(angle);
    GateCost {
        duration: 1,
        rz_steps: if counted { vec![0] } else { vec![] },
        rz: counted as usize,
        cnot: 0,
        non_clifford: counted as usize,
    }
}

fn cphase_cost(angle: f64) -> GateCost {
    let counted = !is_clifford_angle(angle / 2.0);
    GateCost {
        duration: 3,
        rz_steps: if counted { vec![1] } else { vec![] },
        rz: 2 * counted as usize,
        cnot: 2,
        non_clifford: 2 * counted as usize,
    }
}

fn mcx_cost(controls: usize, model: &CostModel) -> GateCost {
    GateCost {
        duration: model.mcx.depth(controls),
        cnot: (controls == 1) as usize,
        non_clifford: (controls >= 2) as usize,
        ..Default::default()
    }
}

fn sequence_cost(gates: &[Gate], model: &CostModel) -> GateCost {
    let acc = accumulate(gates, model);
    GateCost {
        duration: acc.depth,
        rz_steps: acc.rz_steps.into_iter().collect(),
        rz: acc.rz,
        cnot: acc.cnot,
        non_clifford: acc.non_clifford,
    }
}

struct Accumulated {
    depth: usize,
    rz_steps: BTreeSet<usize>,
    rz: usize,
    cnot: usize,
    non_clifford: usize,
    spans: Vec<(usize, usize)>,
}

fn accumulate(gates: &[Gate], model: &CostModel) -> Accumulated {
    let mut ready: std::collections::HashMap<usize, usize> = std::collections::HashMap::new();
    let mut acc = Accumulated {
        depth: 0,
        rz_steps: BTreeSet::new(),
        rz: 0,
        cnot: 0,
        non_clifford: 0,
        spans: Vec::with_capacity(gates.len()),
    };
    for g in gates {
        let cost = gate_cost(g, model);
        let support = g.qubits();
        let start = support
            .iter()
            .map(|q| ready.get(q).copied().unwrap_or(0))
            .max()
            .unwrap_or(0);
        let end = start + cost.duration;
        if cost.duration > 0 {
            for q in support {
                ready.insert(q, end);
            }
        }
        acc.depth = acc.depth.max(end);
        acc.rz_steps.extend(cost.rz_steps.iter().map(|s| start + s));
        acc.rz += cost.rz;
        acc.cnot += cost.cnot;
        acc.non_clifford += cost.non_clifford;
        acc.spans.push((start, end));
    }
    acc
}

/// `[start, end)` time steps of every gate under ASAP layering.
pub fn schedule(circuit: &Circuit) -> Vec<(usize, usize)> {
    accumulate(circuit.gates(), &CostModel::default()).spans
}

pub fn resources(circuit: &Circuit) -> ResourceReport {
    resources_with(circuit, &CostModel::default())
}

pub fn resources_with(circuit: &Circuit, model: &CostModel) -> ResourceReport {
    let acc = accumulate(circuit.gates(), model);
    let mut partners: Vec<HashSet<usize>> = vec![HashSet::new(); circuit.num_qubits()];
    for g in circuit.gates() {
        let qs = g.qubits();
        if qs.len() < 2 {
            continue;
        }
        for &a in &qs {
            for &b in &qs {
                if a != b {
                    partners[a].insert(b);
                }
            }
        }
    }
    ResourceReport {
        total_depth: acc.depth,
        rz_depth: acc.rz_steps.len(),
        rz_count: acc.rz,
        cnot_count: acc.cnot,
        non_clifford_count: acc.non_clifford,
        qubit_count: circuit.num_qubits(),
        max_qubit_degree: partners.iter().map(HashSet::len).max().unwrap_or(0),
        gate_count: circuit.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use std::f64::consts::PI;

    #[test]
    fn empty_circuit_is_free() {
        let r = resources(&Circuit::new());
        assert_eq!(r, ResourceReport::default());
    }

    #[test]
    fn parallel_rotations_share_a_layer() {
        let mut c = Circuit::new();
        c.add_register("q", 3);
        for q in 0..3 {
            c.add(Gate::Phase { qubit: q, angle: 0.1 });
        }
        c.add(Gate::Phase {
            qubit: 0,
            angle: PI / 2.0,
        });
        let r = resources(&c);
        assert_eq!(r.total_depth, 2);
        assert_eq!(r.rz_depth, 1);
        assert_eq!(r.rz_count, 3);
        assert_eq!(r.non_clifford_count, 3);
    }

    #[test]
    fn cphase_charges() {
        let mut c = Circuit::new();
        c.add_register("q", 2);
        c.add(Gate::CPhase {
            control: 0,
            target: 1,
            angle: PI / 2.0,
        });
        c.add(Gate::CPhase {
            control: 0,
            target: 1,
            angle: PI,
        });
        let r = resources(&c);
        assert_eq!(r.rz_count, 2);
        assert_eq!(r.cnot_count, 4);
        assert_eq!(r.total_depth, 6);
        assert_eq!(r.max_qubit_degree, 1);
    }

    #[test]
    fn mcx_depth_model() {
        let m = McxDepth::default();
        assert_eq!(m.depth(1), 1);
        assert_eq!(m.depth(2), 3);
        assert_eq!(m.depth(8), 7);
        assert_eq!(ceil_log2(5), 3);
    }

    #[test]
    fn approximate_qft_is_cheaper() {
        let mut c = Circuit::new();
        c.add_register("q", 8);
        c.add(Gate::Qft {
            qubits: (0..8).collect(),
        });
        let exact = resources(&c);
        let approx = resources_with(
            &c,
            &CostModel {
                qft: QftModel::Approximate { max_order: 3 },
                ..Default::default()
            },
        );
        assert!(approx.rz_count < exact.rz_count);
        // every controlled rotation has order ≥ 2, so its half-angle is non-Clifford
        assert_eq!(exact.rz_count, 2 * 28);
    }

    proptest! {
        #[test]
        fn asap_layers_are_disjoint(seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let mut c = Circuit::new();
            c.add_register("q", 6);
            for _ in 0..40 {
                let a = rng.gen_range(0..6);
                let b = (a + rng.gen_range(1..6)) % 6;
                let g = match rng.gen_range(0..4) {
                    0 => Gate::H { qubit: a },
                    1 => Gate::Cnot { control: a, target: b },
                    2 => Gate::Phase { qubit: a, angle: rng.gen_range(0.1..3.0) },
                    _ => Gate::Fanout { control: a, targets: (0..6).filter(|&q| q != a).take(rng.gen_range(1..5)).collect() },
                };
                c.add(g);
            }
            let spans = schedule(&c);
            for i in 0..spans.len() {
                for j in 0..i {
                    let overlap = spans[i].0 < spans[j].1 && spans[j].0 < spans[i].1;
                    if overlap {
                        let qi = c.gates()[i].qubits();
                        prop_assert!(c.gates()[j].qubits().iter().all(|q| !qi.contains(q)));
                    }
                }
            }
        }
    }
}
