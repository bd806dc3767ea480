//! Rewriting passes that replace macro gates by smaller ones.

use std::f64::consts::PI;

use super::{Circuit, Gate};
use crate::error::{Error, Result};

/// CNOT network computing `t_i ^= c` for every target, for arbitrary target contents.
///
/// The control and targets form the nodes `0..=k` of a binomial broadcast tree:
/// in round `r` node `i < 2^r` copies to node `i + 2^r`. Copying from a target
/// would also copy its own original content, so the target-to-target edges are
/// first applied in reverse order, which pre-cancels that contribution. The
/// result has `2k − L` CNOTs and depth `2L − 1` with `L = ⌈log₂(k+1)⌉`.
pub fn fanout_tree(control: usize, targets: &[usize]) -> Vec<Gate> {
    let k = targets.len();
    let node = |i: usize| if i == 0 { control } else { targets[i - 1] };
    let mut edges = Vec::with_capacity(k);
    let mut span = 1;
    while span <= k {
        for i in 0..span {
            if i + span <= k {
                edges.push((i, i + span));
            }
        }
        span *= 2;
    }
    let cnot = |&(p, c): &(usize, usize)| Gate::Cnot {
        control: node(p),
        target: node(c),
    };
    edges
        .iter()
        .rev()
        .filter(|(p, _)| *p != 0)
        .map(cnot)
        .chain(edges.iter().map(cnot))
        .collect()
}

/// Number of broadcast rounds for `k` targets.
pub fn fanout_layers(k: usize) -> usize {
    (usize::BITS - k.leading_zeros()) as usize
}

pub fn lower_fanout(circuit: &Circuit) -> Circuit {
    map_gates(circuit, |g| match g {
        Gate::Fanout { control, targets } => fanout_tree(*control, targets),
        other => vec![other.clone()],
    })
}

/// Textbook QFT: Hadamards and controlled phases, then the bit-reversal swaps.
///
/// With `max_order = Some(b)` controlled rotations by `2π/2^k` with `k > b` are
/// dropped (approximate QFT).
pub fn qft_gates(qubits: &[usize], max_order: Option<usize>) -> Vec<Gate> {
    let d = qubits.len();
    let mut gates = Vec::new();
    for j in 0..d {
        gates.push(Gate::H { qubit: qubits[j] });
        for k in j + 1..d {
            let order = k - j + 1;
            if max_order.is_some_and(|b| order > b) {
                continue;
            }
            gates.push(Gate::CPhase {
                control: qubits[k],
                target: qubits[j],
                angle: 2.0 * PI / (1u64 << order) as f64,
            });
        }
    }
    for j in 0..d / 2 {
        let (a, b) = (qubits[j], qubits[d - 1 - j]);
        gates.push(Gate::Cnot { control: a, target: b });
        gates.push(Gate::Cnot { control: b, target: a });
        gates.push(Gate::Cnot { control: a, target: b });
    }
    gates
}

pub fn iqft_gates(qubits: &[usize], max_order: Option<usize>) -> Vec<Gate> {
    qft_gates(qubits, max_order).iter().rev().map(Gate::inverse).collect()
}

pub fn lower_qft(circuit: &Circuit) -> Circuit {
    lower_qft_approx(circuit, None)
}

pub fn lower_qft_approx(circuit: &Circuit, max_order: Option<usize>) -> Circuit {
    map_gates(circuit, |g| match g {
        Gate::Qft { qubits } => qft_gates(qubits, max_order),
        Gate::Iqft { qubits } => iqft_gates(qubits, max_order),
        other => vec![other.clone()],
    })
}

/// Replaces every `McPhase` on three or more qubits by
/// `MCX(support → ancilla) · Phase(ancilla) · MCX(support → ancilla)`.
/// The ancilla must start and therefore end in `|0⟩`.
pub fn lower_mcphase(circuit: &Circuit, ancilla: usize) -> Result<Circuit> {
    if ancilla >= circuit.num_qubits() {
        return Err(Error::QubitOutOfRange {
            qubit: ancilla,
            num_qubits: circuit.num_qubits(),
        });
    }
    if circuit.gates().iter().any(|g| g.qubits().contains(&ancilla)) {
        return Err(Error::InvalidCircuit(format!(
            "ancilla {ancilla} is used by the circuit"
        )));
    }
    Ok(map_gates(circuit, |g| match g {
        Gate::McPhase { qubits, angle } if qubits.len() >= 3 => mcphase_via_ancilla(qubits, *angle, ancilla),
        other => vec![other.clone()],
    }))
}

pub fn mcphase_via_ancilla(qubits: &[usize], angle: f64, ancilla: usize) -> Vec<Gate> {
    let mcx = Gate::Mcx {
        controls: qubits.to_vec(),
        target: ancilla,
    };
    vec![mcx.clone(), Gate::Phase { qubit: ancilla, angle }, mcx]
}

fn map_gates(circuit: &Circuit, f: impl Fn(&Gate) -> Vec<Gate>) -> Circuit {
    let mut out = Circuit::with_layout_of(circuit);
    out.replace_gates(
        circuit
            .gates()
            .iter()
            .flat_map(f)
            .filter(|g| !g.is_identity())
            .collect(),
    );
    out
}
