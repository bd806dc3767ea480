use std::collections::HashMap;

use num_complex::Complex64;

use super::{dft, QuantumState};
use crate::circuit::Gate;
use crate::error::{Error, Result};

pub const SPARSE_QUBIT_CAP: usize = 128;

/// Amplitudes below this magnitude are dropped after non-permutation gates.
const PRUNE: f64 = 1e-14;

/// Statevector storing only nonzero amplitudes, sorted by basis index.
///
/// Suited to encoder circuits, which keep wide ancilla registers in a few
/// basis states while only a small register is in superposition.
#[derive(Clone, Debug, PartialEq)]
pub struct SparseState {
    num_qubits: usize,
    entries: Vec<(u128, Complex64)>,
}

impl SparseState {
    pub fn basis(num_qubits: usize, index: u128) -> Result<Self> {
        if num_qubits > SPARSE_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: num_qubits,
                cap: SPARSE_QUBIT_CAP,
            });
        }
        if num_qubits < 128 && index >> num_qubits != 0 {
            return Err(Error::Parameter(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        Ok(SparseState {
            num_qubits,
            entries: vec![(index, Complex64::new(1.0, 0.0))],
        })
    }

    pub fn from_entries(num_qubits: usize, entries: Vec<(u128, Complex64)>) -> Result<Self> {
        let mut s = Self::basis(num_qubits, 0)?;
        s.entries = merge(entries);
        Ok(s)
    }

    pub fn amplitude(&self, index: u128) -> Complex64 {
        match self.entries.binary_search_by_key(&index, |e| e.0) {
            Ok(i) => self.entries[i].1,
            Err(_) => Complex64::new(0.0, 0.0),
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn mask(&self, q: usize) -> Result<u128> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1u128 << (self.num_qubits - 1 - q))
    }

    fn masks(&self, qs: &[usize]) -> Result<u128> {
        qs.iter().try_fold(0, |acc, &q| Ok(acc | self.mask(q)?))
    }

    fn permute(&mut self, cond: u128, flip: u128) {
        for e in &mut self.entries {
            if e.0 & cond == cond {
                e.0 ^= flip;
            }
        }
        self.entries.sort_unstable_by_key(|e| e.0);
    }

    fn phase_where(&mut self, cond: u128, angle: f64) {
        let w = Complex64::from_polar(1.0, angle);
        for e in &mut self.entries {
            if e.0 & cond == cond {
                e.1 *= w;
            }
        }
    }

    fn fourier(&mut self, qubits: &[usize], inverse: bool) -> Result<()> {
        let masks: Vec<u128> = qubits.iter().map(|&q| self.mask(q)).collect::<Result<_>>()?;
        let reg_mask = masks.iter().fold(0, |a, m| a | m);
        let d = qubits.len();
        let offsets: Vec<u128> = (0..1usize << d)
            .map(|y| {
                (0..d)
                    .filter(|a| (y >> (d - 1 - a)) & 1 == 1)
                    .fold(0, |acc, a| acc | masks[a])
            })
            .collect();
        let position: HashMap<u128, usize> = offsets.iter().enumerate().map(|(y, &o)| (o, y)).collect();
        let mut groups: HashMap<u128, Vec<Complex64>> = HashMap::new();
        for &(idx, amp) in &self.entries {
            let buf = groups
                .entry(idx & !reg_mask)
                .or_insert_with(|| vec![Complex64::new(0.0, 0.0); 1 << d]);
            buf[position[&(idx & reg_mask)]] += amp;
        }
        let mut out = Vec::with_capacity(groups.len() << d);
        for (base, mut buf) in groups {
            dft(&mut buf, inverse);
            out.extend(buf.into_iter().enumerate().map(|(y, a)| (base | offsets[y], a)));
        }
        self.entries = merge(out);
        Ok(())
    }
}

/// Sorts, sums duplicate indices and drops negligible amplitudes.
fn merge(mut v: Vec<(u128, Complex64)>) -> Vec<(u128, Complex64)> {
    v.sort_unstable_by_key(|e| e.0);
    let mut out: Vec<(u128, Complex64)> = Vec::with_capacity(v.len());
    for (i, a) in v {
        match out.last_mut() {
            Some(last) if last.0 == i => last.1 += a,
            _ => out.push((i, a)),
        }
    }
    out.retain(|e| e.1.norm() >= PRUNE);
    out
}

impl QuantumState for SparseState {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::H { qubit } => {
                let m = self.mask(*qubit)?;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                let mut out = Vec::with_capacity(2 * self.entries.len());
                for &(i, a) in &self.entries {
                    out.push((i & !m, a * s));
                    out.push((i | m, if i & m == 0 { a * s } else { -a * s }));
                }
                self.entries = merge(out);
            }
            Gate::X { qubit } => {
                let m = self.mask(*qubit)?;
                self.permute(0, m);
            }
            Gate::Cnot { control, target } => {
                let (c, t) = (self.mask(*control)?, self.mask(*target)?);
                self.permute(c, t);
            }
            Gate::Fanout { control, targets } => {
                let (c, t) = (self.mask(*control)?, self.masks(targets)?);
                self.permute(c, t);
            }
            Gate::Mcx { controls, target } => {
                let (c, t) = (self.masks(controls)?, self.mask(*target)?);
                self.permute(c, t);
            }
            Gate::Phase { qubit, angle } => {
                let m = self.mask(*qubit)?;
                self.phase_where(m, *angle);
            }
            Gate::CPhase { control, target, angle } => {
                let m = self.masks(&[*control, *target])?;
                self.phase_where(m, *angle);
            }
            Gate::McPhase { qubits, angle } => {
                let m = self.masks(qubits)?;
                self.phase_where(m, *angle);
            }
            Gate::GlobalPhase { angle } => self.phase_where(0, *angle),
            Gate::Qft { qubits } => self.fourier(qubits, false)?,
            Gate::Iqft { qubits } => self.fourier(qubits, true)?,
        }
        Ok(())
    }

    fn nonzero(&self) -> Vec<(u128, Complex64)> {
        self.entries.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Circuit;
    use crate::sim::Statevector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn matches_dense_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let q = 6;
            let mut c = Circuit::new();
            c.add_register("q", q);
            for _ in 0..40 {
                let a = rng.gen_range(0..q);
                let b = (a + rng.gen_range(1..q)) % q;
                let g = match rng.gen_range(0..7) {
                    0 => Gate::H { qubit: a },
                    1 => Gate::Cnot { control: a, target: b },
                    2 => Gate::Phase {
                        qubit: a,
                        angle: rng.gen_range(-3.0..3.0),
                    },
                    3 => Gate::Fanout {
                        control: a,
                        targets: (0..q).filter(|&t| t != a && rng.gen_bool(0.5)).collect(),
                    },
                    4 => Gate::Qft { qubits: vec![b, a] },
                    5 => Gate::McPhase {
                        qubits: vec![a, b],
                        angle: 0.7,
                    },
                    _ => Gate::Iqft { qubits: vec![a] },
                };
                c.add(g);
            }
            let start = rng.gen_range(0..64u64);
            let mut dense = Statevector::basis(q, start).unwrap();
            let mut sparse = SparseState::basis(q, start as u128).unwrap();
            dense.run(&c).unwrap();
            sparse.run(&c).unwrap();
            for i in 0..64 {
                assert!((dense.amplitude(i) - sparse.amplitude(i as u128)).norm() < 1e-12);
            }
            assert!((sparse.norm_sqr() - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn wide_registers_stay_small() {
        let mut s = SparseState::basis(100, 0).unwrap();
        s.apply(&Gate::H { qubit: 0 }).unwrap();
        s.apply(&Gate::Fanout {
            control: 0,
            targets: (1..100).collect(),
        })
        .unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.amplitude(u128::MAX >> 28).re - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(SparseState::basis(129, 0).is_err());
    }
}
