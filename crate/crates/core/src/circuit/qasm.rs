//! OpenQASM 3 export. `Fanout`, `Qft` and `Iqft` have no standard-library
//! counterpart and must be lowered first; multi-controlled gates use `ctrl @`.

use std::fmt::Write as _;

use super::{Circuit, Gate};
use crate::error::{Error, Result};

pub fn to_qasm(circuit: &Circuit) -> Result<String> {
    let mut out = String::from("OPENQASM 3.0;\ninclude \"stdgates.inc\";\n\n");
    for r in circuit.registers() {
        writeln!(out, "// {}: q[{}..{}]", r.name, r.start, r.start + r.len).unwrap();
    }
    writeln!(out, "qubit[{}] q;", circuit.num_qubits()).unwrap();
    let list = |qs: &[usize]| qs.iter().map(|q| format!("q[{q}]")).collect::<Vec<_>>().join(", ");
    for g in circuit.gates() {
        let line = match g {
            Gate::H { qubit } => format!("h q[{qubit}];"),
            Gate::X { qubit } => format!("x q[{qubit}];"),
            Gate::Cnot { control, target } => format!("cx q[{control}], q[{target}];"),
            Gate::Phase { qubit, angle } => format!("p({angle:?}) q[{qubit}];"),
            Gate::CPhase { control, target, angle } => format!("cp({angle:?}) q[{control}], q[{target}];"),
            Gate::Mcx { controls, target } => match controls.len() {
                1 => format!("cx q[{}], q[{target}];", controls[0]),
                k => format!("ctrl({k}) @ x {}, q[{target}];", list(controls)),
            },
            Gate::McPhase { qubits, angle } => match qubits.len() {
                1 => format!("p({angle:?}) q[{}];", qubits[0]),
                k => format!("ctrl({}) @ p({angle:?}) {};", k - 1, list(qubits)),
            },
            Gate::GlobalPhase { angle } => format!("gphase({angle:?});"),
            Gate::Fanout { .. } => return Err(Error::Unlowered("fanout")),
            Gate::Qft { .. } | Gate::Iqft { .. } => return Err(Error::Unlowered("qft")),
        };
        out.push_str(&line);
        out.push('\n');
    }
    Ok(out)
}
