use num_complex::Complex64;

use super::{dft, QuantumState};
use crate::circuit::Gate;
use crate::error::{Error, Result};

/// 2^26 amplitudes of 16 bytes each is 1 GiB.
pub const DENSE_QUBIT_CAP: usize = 26;

#[derive(Clone, Debug, PartialEq)]
pub struct Statevector {
    num_qubits: usize,
    amps: Vec<Complex64>,
}

impl Statevector {
    pub fn new(num_qubits: usize) -> Result<Self> {
        Self::basis(num_qubits, 0)
    }

    pub fn basis(num_qubits: usize, index: u64) -> Result<Self> {
        if num_qubits > DENSE_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: num_qubits,
                cap: DENSE_QUBIT_CAP,
            });
        }
        let dim = 1usize << num_qubits;
        if index as usize >= dim {
            return Err(Error::Parameter(format!(
                "basis index {index} out of range for {num_qubits} qubits"
            )));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dim];
        amps[index as usize] = Complex64::new(1.0, 0.0);
        Ok(Statevector { num_qubits, amps })
    }

    pub fn from_amplitudes(num_qubits: usize, amps: Vec<Complex64>) -> Result<Self> {
        if num_qubits > DENSE_QUBIT_CAP {
            return Err(Error::TooManyQubits {
                qubits: num_qubits,
                cap: DENSE_QUBIT_CAP,
            });
        }
        if amps.len() != 1usize << num_qubits {
            return Err(Error::Parameter(format!(
                "{} amplitudes for {num_qubits} qubits",
                amps.len()
            )));
        }
        Ok(Statevector { num_qubits, amps })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn amplitude(&self, index: usize) -> Complex64 {
        self.amps[index]
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(Complex64::norm_sqr).collect()
    }

    fn mask(&self, q: usize) -> Result<usize> {
        if q >= self.num_qubits {
            return Err(Error::QubitOutOfRange {
                qubit: q,
                num_qubits: self.num_qubits,
            });
        }
        Ok(1 << (self.num_qubits - 1 - q))
    }

    fn masks(&self, qs: &[usize]) -> Result<usize> {
        qs.iter().try_fold(0, |acc, &q| Ok(acc | self.mask(q)?))
    }

    /// Swaps amplitude `i` with `i ^ flip` for every `i` whose `cond` bits are all set.
    fn permute(&mut self, cond: usize, flip: usize) {
        for i in 0..self.amps.len() {
            if i & cond == cond {
                let j = i ^ flip;
                if i < j {
                    self.amps.swap(i, j);
                }
            }
        }
    }

    fn phase_where(&mut self, cond: usize, angle: f64) {
        let w = Complex64::from_polar(1.0, angle);
        for (i, a) in self.amps.iter_mut().enumerate() {
            if i & cond == cond {
                *a *= w;
            }
        }
    }

    fn fourier(&mut self, qubits: &[usize], inverse: bool) -> Result<()> {
        let masks: Vec<usize> = qubits.iter().map(|&q| self.mask(q)).collect::<Result<_>>()?;
        let reg_mask = masks.iter().fold(0, |a, m| a | m);
        let d = qubits.len();
        let mut buf = vec![Complex64::new(0.0, 0.0); 1 << d];
        let offsets: Vec<usize> = (0..1usize << d)
            .map(|y| {
                (0..d)
                    .filter(|a| (y >> (d - 1 - a)) & 1 == 1)
                    .fold(0, |acc, a| acc | masks[a])
            })
            .collect();
        for base in 0..self.amps.len() {
            if base & reg_mask != 0 {
                continue;
            }
            for (y, off) in offsets.iter().enumerate() {
                buf[y] = self.amps[base | off];
            }
            dft(&mut buf, inverse);
            for (y, off) in offsets.iter().enumerate() {
                self.amps[base | off] = buf[y];
            }
        }
        Ok(())
    }
}

impl QuantumState for Statevector {
    fn num_qubits(&self) -> usize {
        self.num_qubits
    }

    fn apply(&mut self, gate: &Gate) -> Result<()> {
        match gate {
            Gate::H { qubit } => {
                let m = self.mask(*qubit)?;
                let s = std::f64::consts::FRAC_1_SQRT_2;
                for i in 0..self.amps.len() {
                    if i & m == 0 {
                        let (a, b) = (self.amps[i], self.amps[i | m]);
                        self.amps[i] = (a + b) * s;
                        self.amps[i | m] = (a - b) * s;
                    }
                }
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
        self.amps
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm() >= 1e-14)
            .map(|(i, a)| (i as u128, *a))
            .collect()
    }

    fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(Complex64::norm_sqr).sum()
    }
}
