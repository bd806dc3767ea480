//! Exact statevector simulation.
//!
//! Basis index bit `num_qubits − 1 − q` holds qubit `q`, so qubit 0 is the most
//! significant bit and registers read MSB-first.

mod dense;
mod sparse;

use num_complex::Complex64;
use serde::Serialize;

use crate::circuit::{reg, Circuit, Gate};
use crate::error::{Error, Result};

pub use dense::{Statevector, DENSE_QUBIT_CAP};
pub use sparse::{SparseState, SPARSE_QUBIT_CAP};

pub trait QuantumState {
    fn num_qubits(&self) -> usize;
    fn apply(&mut self, gate: &Gate) -> Result<()>;
    /// Nonzero amplitudes in ascending index order.
    fn nonzero(&self) -> Vec<(u128, Complex64)>;

    fn run(&mut self, circuit: &Circuit) -> Result<()> {
        if circuit.num_qubits() != self.num_qubits() {
            return Err(Error::InvalidCircuit(format!(
                "circuit has {} qubits, state has {}",
                circuit.num_qubits(),
                self.num_qubits()
            )));
        }
        for g in circuit.gates() {
            self.apply(g)?;
        }
        Ok(())
    }

    fn norm_sqr(&self) -> f64 {
        self.nonzero().iter().map(|(_, a)| a.norm_sqr()).sum()
    }
}

/// Value of the register made of `qubits` (MSB first) in basis state `index`.
pub fn register_value(index: u128, num_qubits: usize, qubits: &[usize]) -> u64 {
    qubits.iter().fold(0u64, |acc, &q| {
        (acc << 1) | ((index >> (num_qubits - 1 - q)) & 1) as u64
    })
}

/// Basis index with `value` written into `qubits` (MSB first) and zeros elsewhere.
pub fn embed_register(value: u64, num_qubits: usize, qubits: &[usize]) -> u128 {
    let d = qubits.len();
    qubits.iter().enumerate().fold(0u128, |acc, (a, &q)| {
        let bit = (value >> (d - 1 - a)) & 1;
        acc | ((bit as u128) << (num_qubits - 1 - q))
    })
}

/// In-place unitary DFT `out[z] = Σ_y in[y] e^{±2πi yz/N} / √N`, `N` a power of two.
pub(crate) fn dft(buf: &mut [Complex64], inverse: bool) {
    let n = buf.len();
    if n <= 1 {
        return;
    }
    let bits = n.trailing_zeros();
    for i in 0..n {
        let j = i.reverse_bits() >> (usize::BITS - bits);
        if i < j {
            buf.swap(i, j);
        }
    }
    let sign = if inverse { -1.0 } else { 1.0 };
    let mut len = 2;
    while len <= n {
        let step = sign * std::f64::consts::TAU / len as f64;
        for chunk in buf.chunks_mut(len) {
            let half = len / 2;
            for k in 0..half {
                let w = Complex64::from_polar(1.0, step * k as f64);
                let a = chunk[k];
                let b = chunk[k + half] * w;
                chunk[k] = a + b;
                chunk[k + half] = a - b;
            }
        }
        len *= 2;
    }
    let scale = 1.0 / (n as f64).sqrt();
    for v in buf.iter_mut() {
        *v *= scale;
    }
}

/// Runs `circuit` on `|0…0⟩`, picking the dense simulator when it fits.
pub fn simulate(circuit: &Circuit) -> Result<Box<dyn QuantumState>> {
    simulate_from(circuit, 0)
}

/// Runs `circuit` on the basis state `index`.
pub fn simulate_from(circuit: &Circuit, index: u128) -> Result<Box<dyn QuantumState>> {
    let q = circuit.num_qubits();
    let mut state: Box<dyn QuantumState> = if q <= DENSE_QUBIT_CAP.min(20) {
        Box::new(Statevector::basis(q, index as u64)?)
    } else {
        Box::new(SparseState::basis(q, index)?)
    };
    state.run(circuit)?;
    Ok(state)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SuccessReport {
    /// Mass on marked `x` with every other register back in `|0⟩`.
    pub probability: f64,
    /// Mass with some value or ancilla qubit not in `|0⟩`.
    pub leakage: f64,
}

/// Distribution of the `x` register, plus the mass outside the clean work subspace.
pub fn input_marginal(circuit: &Circuit, state: &dyn QuantumState) -> (Vec<f64>, f64) {
    let x = circuit.qubits_of(reg::INPUT);
    let q = circuit.num_qubits();
    let x_mask = embed_register(u64::MAX >> (64 - x.len().max(1)), q, &x);
    let mut marginal = vec![0.0; 1usize << x.len()];
    let mut leakage = 0.0;
    for (idx, amp) in state.nonzero() {
        if idx & !x_mask != 0 {
            leakage += amp.norm_sqr();
        } else {
            marginal[register_value(idx, q, &x) as usize] += amp.norm_sqr();
        }
    }
    (marginal, leakage)
}

/// `|⟨marked, 0|ψ⟩|²` for the output `ψ` of `circuit` on `|0…0⟩`.
pub fn success_probability(circuit: &Circuit, marked: &[u64]) -> Result<SuccessReport> {
    let n = circuit.qubits_of(reg::INPUT).len();
    if let Some(&bad) = marked.iter().find(|&&m| n < 64 && m >> n != 0) {
        return Err(Error::Parameter(format!(
            "marked configuration {bad} has more than {n} bits"
        )));
    }
    let state = simulate(circuit)?;
    let (marginal, leakage) = input_marginal(circuit, state.as_ref());
    let mut seen = std::collections::BTreeSet::new();
    let probability = marked
        .iter()
        .filter(|m| seen.insert(**m))
        .map(|&m| marginal[m as usize])
        .sum();
    Ok(SuccessReport { probability, leakage })
}
