//! Gate-level circuits over named qubit registers.

mod gate;
pub mod lower;
pub mod qasm;
pub mod resources;

use std::collections::BTreeMap;
use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use gate::{is_clifford_angle, is_trivial_angle, Gate, ANGLE_EPS};
pub use resources::{resources, resources_with, schedule, CostModel, McxDepth, QftModel, ResourceReport};

/// Conventional register names used by the builders.
pub mod reg {
    pub const INPUT: &str = "x";
    pub const VALUE: &str = "y";
    pub const ANCILLA: &str = "anc";
    pub const DIFFUSER_ANCILLA: &str = "diff_anc";
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Register {
    pub name: String,
    pub start: usize,
    pub len: usize,
}

impl Register {
    pub fn qubits(&self) -> Range<usize> {
        self.start..self.start + self.len
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct Circuit {
    num_qubits: usize,
    registers: Vec<Register>,
    gates: Vec<Gate>,
    pub metadata: BTreeMap<String, String>,
}

#[derive(Deserialize)]
struct RawCircuit {
    num_qubits: usize,
    registers: Vec<Register>,
    gates: Vec<Gate>,
    #[serde(default)]
    metadata: BTreeMap<String, String>,
}

impl Circuit {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a register of `len` qubits and returns its index range.
    pub fn add_register(&mut self, name: &str, len: usize) -> Range<usize> {
        assert!(self.register(name).is_none(), "register {name} declared twice");
        let start = self.num_qubits;
        self.registers.push(Register {
            name: name.to_string(),
            start,
            len,
        });
        self.num_qubits += len;
        start..start + len
    }

    /// An empty circuit with the same register layout.
    pub fn with_layout_of(other: &Circuit) -> Self {
        Circuit {
            num_qubits: other.num_qubits,
            registers: other.registers.clone(),
            gates: Vec::new(),
            metadata: other.metadata.clone(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    pub fn registers(&self) -> &[Register] {
        &self.registers
    }

    pub fn register(&self, name: &str) -> Option<&Register> {
        self.registers.iter().find(|r| r.name == name)
    }

    /// Qubits of a register, empty when it is not declared.
    pub fn qubits_of(&self, name: &str) -> Vec<usize> {
        self.register(name).map(|r| r.qubits().collect()).unwrap_or_default()
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    fn validate(&self, gate: &Gate) -> Result<()> {
        let qs = gate.qubits();
        for (i, &q) in qs.iter().enumerate() {
            if q >= self.num_qubits {
                return Err(Error::QubitOutOfRange {
                    qubit: q,
                    num_qubits: self.num_qubits,
                });
            }
            if qs[..i].contains(&q) {
                return Err(Error::InvalidCircuit(format!(
                    "qubit {q} repeated in {} gate",
                    gate.name()
                )));
            }
        }
        if let Some(a) = gate.angle() {
            if !a.is_finite() {
                return Err(Error::InvalidCircuit(format!(
                    "non-finite angle in {} gate",
                    gate.name()
                )));
            }
        }
        if let Gate::Mcx { controls, .. } = gate {
            if controls.is_empty() {
                return Err(Error::InvalidCircuit("mcx needs at least one control".into()));
            }
        }
        if let Gate::McPhase { qubits, .. } = gate {
            if qubits.is_empty() {
                return Err(Error::InvalidCircuit("mcphase needs at least one qubit".into()));
            }
        }
        Ok(())
    }

    /// Validates and appends a gate; identity gates are dropped.
    pub fn push(&mut self, gate: Gate) -> Result<()> {
        self.validate(&gate)?;
        if !gate.is_identity() {
            self.gates.push(gate);
        }
        Ok(())
    }

    /// Builder variant of [`Circuit::push`] for gates constructed internally.
    ///
    /// # Panics
    /// If the gate is invalid for this circuit.
    pub fn add(&mut self, gate: Gate) -> &mut Self {
        if let Err(e) = self.push(gate) {
            panic!("builder produced an invalid gate: {e}");
        }
        self
    }

    /// Appends all gates of `other`, which must have the same qubit count.
    pub fn append(&mut self, other: &Circuit) -> Result<()> {
        if other.num_qubits != self.num_qubits {
            return Err(Error::InvalidCircuit(format!(
                "cannot append a {}-qubit circuit to a {}-qubit one",
                other.num_qubits, self.num_qubits
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    /// The adjoint circuit.
    pub fn inverse(&self) -> Circuit {
        let mut inv = Circuit::with_layout_of(self);
        inv.gates = self.gates.iter().rev().map(Gate::inverse).collect();
        inv
    }

    /// Gates `range` of this circuit as a circuit with the same layout.
    pub fn slice(&self, range: Range<usize>) -> Circuit {
        let mut c = Circuit::with_layout_of(self);
        c.gates = self.gates[range].to_vec();
        c
    }

    pub(crate) fn replace_gates(&mut self, gates: Vec<Gate>) {
        self.gates = gates;
    }

    pub fn count(&self, name: &str) -> usize {
        self.gates.iter().filter(|g| g.name() == name).count()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("circuit serializes")
    }

    /// Parses and validates a circuit written by [`Circuit::to_json`].
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: RawCircuit = serde_json::from_str(text)?;
        let mut c = Circuit::new();
        let mut expected = 0;
        for r in raw.registers {
            if r.start != expected {
                return Err(Error::InvalidCircuit(format!(
                    "register {} starts at {} but the previous one ends at {expected}",
                    r.name, r.start
                )));
            }
            if c.register(&r.name).is_some() {
                return Err(Error::InvalidCircuit(format!("register {} declared twice", r.name)));
            }
            expected += r.len;
            c.add_register(&r.name, r.len);
        }
        if c.num_qubits != raw.num_qubits {
            return Err(Error::InvalidCircuit(format!(
                "registers cover {} qubits but num_qubits is {}",
                c.num_qubits, raw.num_qubits
            )));
        }
        for g in raw.gates {
            c.push(g)?;
        }
        c.metadata = raw.metadata;
        Ok(c)
    }
}
