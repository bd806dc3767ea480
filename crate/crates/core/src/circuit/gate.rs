use std::f64::consts::{FRAC_PI_2, TAU};

use serde::{Deserialize, Serialize};

/// Angles this close to a multiple of `2π` are treated as zero.
pub const ANGLE_EPS: f64 = 1e-15;

/// A gate acting on qubits of a [`super::Circuit`].
///
/// `Phase` is `diag(1, e^{iθ})`. `CPhase` and `McPhase` multiply the all-ones
/// basis state of their support by `e^{iθ}`. `Qft` maps `|y⟩` to
/// `Σ_z e^{2πi yz/2^d} |z⟩ / √(2^d)` with `qubits[0]` the most significant bit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Gate {
    H {
        qubit: usize,
    },
    X {
        qubit: usize,
    },
    Cnot {
        control: usize,
        target: usize,
    },
    Fanout {
        control: usize,
        targets: Vec<usize>,
    },
    Phase {
        qubit: usize,
        angle: f64,
    },
    #[serde(rename = "cphase")]
    CPhase {
        control: usize,
        target: usize,
        angle: f64,
    },
    Mcx {
        controls: Vec<usize>,
        target: usize,
    },
    #[serde(rename = "mcphase")]
    McPhase {
        qubits: Vec<usize>,
        angle: f64,
    },
    Qft {
        qubits: Vec<usize>,
    },
    Iqft {
        qubits: Vec<usize>,
    },
    GlobalPhase {
        angle: f64,
    },
}

/// True when `angle` is zero modulo `2π` up to [`ANGLE_EPS`].
pub fn is_trivial_angle(angle: f64) -> bool {
    let r = angle.rem_euclid(TAU);
    r <= ANGLE_EPS || TAU - r <= ANGLE_EPS
}

/// True when a phase rotation by `angle` is Clifford, i.e. a multiple of `π/2`.
pub fn is_clifford_angle(angle: f64) -> bool {
    let k = angle / FRAC_PI_2;
    (k - k.round()).abs() <= 1e-12
}

impl Gate {
    pub fn name(&self) -> &'static str {
        match self {
            Gate::H { .. } => "h",
            Gate::X { .. } => "x",
            Gate::Cnot { .. } => "cnot",
            Gate::Fanout { .. } => "fanout",
            Gate::Phase { .. } => "phase",
            Gate::CPhase { .. } => "cphase",
            Gate::Mcx { .. } => "mcx",
            Gate::McPhase { .. } => "mcphase",
            Gate::Qft { .. } => "qft",
            Gate::Iqft { .. } => "iqft",
            Gate::GlobalPhase { .. } => "global_phase",
        }
    }

    /// Support of the gate, controls first.
    pub fn qubits(&self) -> Vec<usize> {
        match self {
            Gate::H { qubit } | Gate::X { qubit } | Gate::Phase { qubit, .. } => vec![*qubit],
            Gate::Cnot { control, target } | Gate::CPhase { control, target, .. } => vec![*control, *target],
            Gate::Fanout { control, targets } => std::iter::once(*control).chain(targets.iter().copied()).collect(),
            Gate::Mcx { controls, target } => controls.iter().copied().chain(std::iter::once(*target)).collect(),
            Gate::McPhase { qubits, .. } | Gate::Qft { qubits } | Gate::Iqft { qubits } => qubits.clone(),
            Gate::GlobalPhase { .. } => Vec::new(),
        }
    }

    pub fn angle(&self) -> Option<f64> {
        match self {
            Gate::Phase { angle, .. }
            | Gate::CPhase { angle, .. }
            | Gate::McPhase { angle, .. }
            | Gate::GlobalPhase { angle } => Some(*angle),
            _ => None,
        }
    }

    /// Diagonal gates commute with each other and with controls.
    pub fn is_diagonal(&self) -> bool {
        matches!(
            self,
            Gate::Phase { .. } | Gate::CPhase { .. } | Gate::McPhase { .. } | Gate::GlobalPhase { .. }
        )
    }

    pub fn inverse(&self) -> Gate {
        match self {
            Gate::Phase { qubit, angle } => Gate::Phase {
                qubit: *qubit,
                angle: -angle,
            },
            Gate::CPhase { control, target, angle } => Gate::CPhase {
                control: *control,
                target: *target,
                angle: -angle,
            },
            Gate::McPhase { qubits, angle } => Gate::McPhase {
                qubits: qubits.clone(),
                angle: -angle,
            },
            Gate::GlobalPhase { angle } => Gate::GlobalPhase { angle: -angle },
            Gate::Qft { qubits } => Gate::Iqft { qubits: qubits.clone() },
            Gate::Iqft { qubits } => Gate::Qft { qubits: qubits.clone() },
            other => other.clone(),
        }
    }

    /// Elidable no-ops: zero rotations and fanouts without targets.
    pub fn is_identity(&self) -> bool {
        match self {
            Gate::Fanout { targets, .. } => targets.is_empty(),
            Gate::Qft { qubits } | Gate::Iqft { qubits } => qubits.is_empty(),
            _ => self.angle().is_some_and(is_trivial_angle),
        }
    }

    /// Applies `f` to every qubit index.
    pub fn remap(&self, f: impl Fn(usize) -> usize) -> Gate {
        let v = |qs: &Vec<usize>| qs.iter().map(|&q| f(q)).collect::<Vec<_>>();
        match self {
            Gate::H { qubit } => Gate::H { qubit: f(*qubit) },
            Gate::X { qubit } => Gate::X { qubit: f(*qubit) },
            Gate::Cnot { control, target } => Gate::Cnot {
                control: f(*control),
                target: f(*target),
            },
            Gate::Fanout { control, targets } => Gate::Fanout {
                control: f(*control),
                targets: v(targets),
            },
            Gate::Phase { qubit, angle } => Gate::Phase {
                qubit: f(*qubit),
                angle: *angle,
            },
            Gate::CPhase { control, target, angle } => Gate::CPhase {
                control: f(*control),
                target: f(*target),
                angle: *angle,
            },
            Gate::Mcx { controls, target } => Gate::Mcx {
                controls: v(controls),
                target: f(*target),
            },
            Gate::McPhase { qubits, angle } => Gate::McPhase {
                qubits: v(qubits),
                angle: *angle,
            },
            Gate::Qft { qubits } => Gate::Qft { qubits: v(qubits) },
            Gate::Iqft { qubits } => Gate::Iqft { qubits: v(qubits) },
            Gate::GlobalPhase { angle } => Gate::GlobalPhase { angle: *angle },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn angle_classification() {
        assert!(is_trivial_angle(0.0));
        assert!(is_trivial_angle(TAU));
        assert!(is_trivial_angle(-4.0 * PI));
        assert!(!is_trivial_angle(1e-10));
        assert!(is_clifford_angle(PI / 2.0));
        assert!(is_clifford_angle(-3.0 * PI));
        assert!(!is_clifford_angle(PI / 4.0));
    }

    #[test]
    fn inverse_and_support() {
        let g = Gate::Fanout {
            control: 3,
            targets: vec![0, 1],
        };
        assert_eq!(g.qubits(), vec![3, 0, 1]);
        assert_eq!(g.inverse(), g);
        let q = Gate::Qft { qubits: vec![0, 1] };
        assert_eq!(q.inverse(), Gate::Iqft { qubits: vec![0, 1] });
        assert_eq!(
            Gate::Phase { qubit: 0, angle: 0.3 }.inverse(),
            Gate::Phase { qubit: 0, angle: -0.3 }
        );
    }

    #[test]
    fn json_shape() {
        let g = Gate::CPhase {
            control: 0,
            target: 2,
            angle: 0.5,
        };
        let s = serde_json::to_string(&g).unwrap();
        assert_eq!(s, r#"{"kind":"cphase","control":0,"target":2,"angle":0.5}"#);
        assert_eq!(serde_json::from_str::<Gate>(&s).unwrap(), g);
    }
}
