//! QUBO instances `f(x) = f(0) + Σ_jk Q_jk x_j x_k` over `x ∈ {0,1}^n`.
//!
//! Problems are stored with a symmetric coefficient matrix. Upper-triangular
//! input `U` is accepted as well and symmetrized to `(U + Uᵀ)/2` with the
//! diagonal kept, which leaves `f` unchanged.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bits;
use crate::error::{Error, Result};

/// Problems with more variables than this are never enumerated by default.
pub const DEFAULT_ENUMERATION_CAP: usize = 24;

/// Largest supported value-register width.
pub const MAX_WIDTH: u32 = 52;

const INTEGER_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ValueMode {
    /// Integer-valued `f`; required by the encoder circuits.
    #[default]
    Integer,
    /// Real coefficients; range checks are skipped.
    Real,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QuboProblem {
    n: usize,
    matrix: Vec<f64>,
    offset: f64,
    width: u32,
    mode: ValueMode,
}

/// Coefficients of the XOR form
/// `f(x) = f(0) + Σ_j q_j x_j − Σ_{j<k} Q_jk (x_j ⊕ x_k)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RewriteCoefficients {
    /// `q_j = Σ_k Q_jk`.
    pub qj: Vec<f64>,
    /// `f(0) + tr(Q)/4 + sum(Q)/4`.
    pub q_empty: f64,
    /// Nonzero off-diagonal entries `Q_jk`, `j < k`.
    pub pair_coeffs: BTreeMap<(usize, usize), f64>,
    /// Number of terms: the constant term plus nonzero `q_j` plus nonzero pairs.
    pub m: usize,
}

impl RewriteCoefficients {
    /// Evaluates the XOR form at a configuration index.
    pub fn evaluate_index(&self, offset: f64, index: u64) -> f64 {
        let n = self.qj.len();
        let mut v = offset;
        for (j, q) in self.qj.iter().enumerate() {
            if bits::bit(index, n, j) {
                v += q;
            }
        }
        for (&(j, k), q) in &self.pair_coeffs {
            if bits::bit(index, n, j) != bits::bit(index, n, k) {
                v -= q;
            }
        }
        v
    }
}

fn is_integer(v: f64) -> bool {
    (v - v.round()).abs() <= INTEGER_TOL
}

fn fits(value: f64, width: u32) -> bool {
    let half = (1u64 << (width - 1)) as f64;
    value >= -half && value < half
}

/// Smallest two's-complement width holding every value in `[lo, hi]`.
fn minimal_width(lo: f64, hi: f64) -> u32 {
    (1..=MAX_WIDTH)
        .find(|&d| fits(lo.floor(), d) && fits(hi.ceil(), d))
        .unwrap_or(MAX_WIDTH)
}

impl QuboProblem {
    /// Builds a problem from a square matrix given as rows.
    ///
    /// With `width = None` the smallest register width holding every value is
    /// chosen.
    pub fn new(rows: Vec<Vec<f64>>, offset: f64, width: Option<u32>, mode: ValueMode) -> Result<Self> {
        let n = rows.len();
        if n == 0 {
            return Err(Error::InvalidMatrix("matrix is empty".into()));
        }
        if n > bits::MAX_BITS {
            return Err(Error::InvalidMatrix(format!(
                "{n} variables exceed the limit of {}",
                bits::MAX_BITS
            )));
        }
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!(
                "row {bad} has {} entries, expected {n}",
                rows[bad].len()
            )));
        }
        let flat: Vec<f64> = rows.into_iter().flatten().collect();
        Self::from_flat(n, flat, offset, width, mode)
    }

    /// Row-major variant of [`QuboProblem::new`].
    pub fn from_flat(n: usize, mut matrix: Vec<f64>, offset: f64, width: Option<u32>, mode: ValueMode) -> Result<Self> {
        if n == 0 || matrix.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for n = {n}, got {}",
                n * n,
                matrix.len()
            )));
        }
        if matrix.iter().chain(std::iter::once(&offset)).any(|v| !v.is_finite()) {
            return Err(Error::InvalidMatrix("entries must be finite".into()));
        }
        let symmetric = (0..n).all(|j| (0..j).all(|k| matrix[j * n + k] == matrix[k * n + j]));
        if !symmetric {
            let upper = (0..n).all(|j| (0..j).all(|k| matrix[j * n + k] == 0.0));
            if !upper {
                return Err(Error::InvalidMatrix(
                    "matrix is neither symmetric nor upper-triangular".into(),
                ));
            }
            for j in 0..n {
                for k in j + 1..n {
                    let half = matrix[j * n + k] / 2.0;
                    matrix[j * n + k] = half;
                    matrix[k * n + j] = half;
                }
            }
        }
        if mode == ValueMode::Integer {
            // f is integer-valued exactly when f(0), every Q_jj and every 2 Q_jk are.
            let ok = is_integer(offset)
                && (0..n)
                    .all(|j| is_integer(matrix[j * n + j]) && (j + 1..n).all(|k| is_integer(2.0 * matrix[j * n + k])));
            if !ok {
                return Err(Error::InvalidMatrix(
                    "integer mode needs an integer offset, integer diagonal and integer doubled off-diagonal entries"
                        .into(),
                ));
            }
        }
        let mut problem = QuboProblem {
            n,
            matrix,
            offset,
            width: 1,
            mode,
        };
        let (lo, hi) = problem.value_bounds();
        problem.width = match width {
            Some(d) => {
                if !(1..=MAX_WIDTH).contains(&d) {
                    return Err(Error::Parameter(format!("width {d} outside 1..={MAX_WIDTH}")));
                }
                d
            }
            None => minimal_width(lo, hi),
        };
        if mode == ValueMode::Integer {
            problem.check_range()?;
        }
        Ok(problem)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn q(&self, j: usize, k: usize) -> f64 {
        self.matrix[j * self.n + k]
    }

    pub fn matrix(&self) -> &[f64] {
        &self.matrix
    }

    pub fn rows(&self) -> Vec<Vec<f64>> {
        self.matrix.chunks(self.n).map(<[f64]>::to_vec).collect()
    }

    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Value-register width `d`.
    pub fn width(&self) -> u32 {
        self.width
    }

    pub fn mode(&self) -> ValueMode {
        self.mode
    }

    pub fn with_width(&self, width: u32) -> Result<Self> {
        Self::from_flat(self.n, self.matrix.clone(), self.offset, Some(width), self.mode)
    }

    /// Copy with register width `d` and no range check. Encoders built from it
    /// realise `y + f(x) mod 2^d`, wrapping values that do not fit.
    pub fn with_modular_width(&self, width: u32) -> Result<Self> {
        if !(1..=MAX_WIDTH).contains(&width) {
            return Err(Error::Parameter(format!("width {width} outside 1..={MAX_WIDTH}")));
        }
        Ok(QuboProblem { width, ..self.clone() })
    }

    pub fn evaluate(&self, x: &[bool]) -> Result<f64> {
        if x.len() != self.n {
            return Err(Error::LengthMismatch {
                expected: self.n,
                got: x.len(),
            });
        }
        Ok(self.value_at(bits::to_index(x)))
    }

    /// `f` at a packed configuration (see [`crate::bits`]).
    pub fn value_at(&self, index: u64) -> f64 {
        let n = self.n;
        let mut v = self.offset;
        for j in 0..n {
            if !bits::bit(index, n, j) {
                continue;
            }
            let row = &self.matrix[j * n..(j + 1) * n];
            v += row[j];
            for (k, q) in row.iter().enumerate().skip(j + 1) {
                if bits::bit(index, n, k) {
                    v += 2.0 * q;
                }
            }
        }
        v
    }

    pub fn rewrite(&self) -> RewriteCoefficients {
        let n = self.n;
        let qj: Vec<f64> = (0..n).map(|j| self.matrix[j * n..(j + 1) * n].iter().sum()).collect();
        let trace: f64 = (0..n).map(|j| self.q(j, j)).sum();
        let total: f64 = self.matrix.iter().sum();
        let mut pair_coeffs = BTreeMap::new();
        for j in 0..n {
            for k in j + 1..n {
                let q = self.q(j, k);
                if q != 0.0 {
                    pair_coeffs.insert((j, k), q);
                }
            }
        }
        let m = 1 + qj.iter().filter(|q| **q != 0.0).count() + pair_coeffs.len();
        RewriteCoefficients {
            qj,
            q_empty: self.offset + trace / 4.0 + total / 4.0,
            pair_coeffs,
            m,
        }
    }

    /// Calls `visit(index, f(index))` for every configuration, in Gray-code order.
    ///
    /// Each step flips one variable and updates the value from the cached
    /// local fields, so a sweep costs `O(n 2^n)`.
    pub fn for_each_value(&self, mut visit: impl FnMut(u64, f64)) {
        let n = self.n;
        let mut x = vec![false; n];
        // field[v] = Σ_{k≠v} Q_vk x_k
        let mut field = vec![0.0; n];
        let mut value = self.offset;
        let mut index = 0u64;
        visit(0, value);
        let resync = self.mode == ValueMode::Real;
        for step in 1..(1u64 << n) {
            let pos = step.trailing_zeros() as usize;
            let v = n - 1 - pos;
            let row = &self.matrix[v * n..(v + 1) * n];
            let delta = row[v] + 2.0 * field[v];
            let sign = if x[v] { -1.0 } else { 1.0 };
            value += sign * delta;
            x[v] = !x[v];
            index ^= 1 << pos;
            for (k, f) in field.iter_mut().enumerate() {
                if k != v {
                    *f += sign * row[k];
                }
            }
            if resync && step % 4096 == 0 {
                value = self.value_at(index);
            }
            visit(index, value);
        }
    }

    /// Every `f(x)`, indexed by packed configuration.
    pub fn value_table(&self) -> Result<Vec<f64>> {
        self.value_table_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn value_table_capped(&self, cap: usize) -> Result<Vec<f64>> {
        if self.n > cap {
            return Err(Error::EnumerationCap { n: self.n, cap });
        }
        let mut table = vec![0.0; 1usize << self.n];
        self.for_each_value(|i, v| table[i as usize] = v);
        Ok(table)
    }

    pub fn distribution(&self) -> Result<ValueDistribution> {
        self.distribution_capped(DEFAULT_ENUMERATION_CAP)
    }

    pub fn distribution_capped(&self, cap: usize) -> Result<ValueDistribution> {
        let table = self.value_table_capped(cap)?;
        Ok(ValueDistribution::from_values(self.n, table))
    }

    /// Exact `(min f, max f)` for enumerable sizes, an interval bound otherwise.
    pub fn value_bounds(&self) -> (f64, f64) {
        let n = self.n;
        if n <= DEFAULT_ENUMERATION_CAP {
            let mut lo = f64::INFINITY;
            let mut hi = f64::NEG_INFINITY;
            self.for_each_value(|_, v| {
                lo = lo.min(v);
                hi = hi.max(v);
            });
            return (lo, hi);
        }
        let mut lo = self.offset;
        let mut hi = self.offset;
        for j in 0..n {
            let d = self.q(j, j);
            lo += d.min(0.0);
            hi += d.max(0.0);
            for k in j + 1..n {
                let p = 2.0 * self.q(j, k);
                lo += p.min(0.0);
                hi += p.max(0.0);
            }
        }
        (lo, hi)
    }

    fn check_range(&self) -> Result<()> {
        let width = self.width;
        if self.n <= DEFAULT_ENUMERATION_CAP {
            let mut bad = None;
            self.for_each_value(|i, v| {
                if bad.is_none() && !fits(v, width) {
                    bad = Some((i, v));
                }
            });
            if let Some((i, v)) = bad {
                return Err(Error::ValueOverflow {
                    config: bits::format(i, self.n),
                    value: v,
                    width,
                });
            }
            return Ok(());
        }
        let (lo, hi) = self.value_bounds();
        for v in [lo, hi] {
            if !fits(v, width) {
                return Err(Error::ValueOverflow {
                    config: "<interval bound>".into(),
                    value: v,
                    width,
                });
            }
        }
        Ok(())
    }

    /// The problem `f_y(x) = y − f(x)` at the same width; `x` is marked by the
    /// threshold oracle exactly when `f_y(x) < 0`.
    pub fn shifted(&self, threshold: f64) -> Result<Self> {
        if self.mode == ValueMode::Integer && !is_integer(threshold) {
            return Err(Error::Parameter(format!(
                "threshold {threshold} must be an integer for integer-mode problems"
            )));
        }
        let neg: Vec<f64> = self.matrix.iter().map(|q| -q).collect();
        Self::from_flat(self.n, neg, threshold - self.offset, Some(self.width), self.mode)
    }
}

/// Exact histogram of `f` over all `2^n` configurations.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ValueDistribution {
    pub n: usize,
    /// Distinct values, ascending.
    pub values: Vec<f64>,
    pub counts: Vec<u64>,
}

impl ValueDistribution {
    pub fn from_values(n: usize, mut table: Vec<f64>) -> Self {
        table.sort_unstable_by(f64::total_cmp);
        let mut values = Vec::new();
        let mut counts: Vec<u64> = Vec::new();
        for v in table {
            match values.last() {
                Some(&last) if last == v => *counts.last_mut().unwrap() += 1,
                _ => {
                    values.push(v);
                    counts.push(1);
                }
            }
        }
        ValueDistribution { n, values, counts }
    }

    pub fn total(&self) -> u64 {
        1u64 << self.n
    }

    pub fn num_classes(&self) -> usize {
        self.values.len()
    }

    pub fn class_of(&self, value: f64) -> Option<usize> {
        self.values.binary_search_by(|v| v.total_cmp(&value)).ok()
    }

    /// `|{x : f(x) ≤ y}|`.
    pub fn count_at_most(&self, y: f64) -> u64 {
        let end = self.values.partition_point(|&v| v <= y);
        self.counts[..end].iter().sum()
    }

    /// `|{x : f(x) < y}|`.
    pub fn count_below(&self, y: f64) -> u64 {
        let end = self.values.partition_point(|&v| v < y);
        self.counts[..end].iter().sum()
    }

    /// `|{x : f(x) > y}|`, the size of the marked set at threshold `y`.
    pub fn count_above(&self, y: f64) -> u64 {
        self.total() - self.count_at_most(y)
    }

    /// `F(y)`: fraction of configurations with `f(x) ≤ y`.
    pub fn cdf(&self, y: f64) -> f64 {
        self.count_at_most(y) as f64 / self.total() as f64
    }

    /// `λ(y) = 1 − F(y)`: fraction strictly above `y`.
    pub fn lambda(&self, y: f64) -> f64 {
        self.count_above(y) as f64 / self.total() as f64
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        *self.values.last().unwrap()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        let total = self.total() as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    pub fn mean(&self) -> f64 {
        let total = self.total() as f64;
        self.values
            .iter()
            .zip(&self.counts)
            .map(|(v, &c)| v * c as f64)
            .sum::<f64>()
            / total
    }

    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        let total = self.total() as f64;
        self.values
            .iter()
            .zip(&self.counts)
            .map(|(v, &c)| (v - mean).powi(2) * c as f64)
            .sum::<f64>()
            / total
    }

    /// Whether a configuration with this value lies among the top `ε 2^n`,
    /// i.e. at least `(1 − ε) 2^n` configurations have a strictly smaller value.
    pub fn in_top_fraction(&self, value: f64, epsilon: f64) -> bool {
        self.count_below(value) as f64 >= (1.0 - epsilon) * self.total() as f64
    }

    /// Index of the lowest value class inside the top-`ε` set.
    pub fn top_fraction_class(&self, epsilon: f64) -> usize {
        (0..self.values.len())
            .find(|&c| self.in_top_fraction(self.values[c], epsilon))
            .unwrap_or(self.values.len() - 1)
    }
}

/// On-disk QUBO description.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct QuboFile {
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub d: Option<u32>,
    #[serde(default)]
    pub offset: f64,
    pub matrix: MatrixRepr,
    #[serde(default)]
    pub mode: ValueMode,
}

/// Row-major matrix, either nested rows or a flat list of `n²` entries.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MatrixRepr {
    Rows(Vec<Vec<f64>>),
    Flat(Vec<f64>),
}

impl QuboFile {
    pub fn into_problem(self) -> Result<QuboProblem> {
        let flat = match self.matrix {
            MatrixRepr::Rows(rows) => {
                if rows.len() != self.n || rows.iter().any(|r| r.len() != self.n) {
                    return Err(Error::InvalidMatrix(format!("matrix is not {0}x{0}", self.n)));
                }
                rows.into_iter().flatten().collect()
            }
            MatrixRepr::Flat(v) => v,
        };
        QuboProblem::from_flat(self.n, flat, self.offset, self.d, self.mode)
    }

    pub fn from_problem(p: &QuboProblem) -> Self {
        QuboFile {
            n: p.n,
            d: Some(p.width),
            offset: p.offset,
            matrix: MatrixRepr::Rows(p.rows()),
            mode: p.mode,
        }
    }
}

impl QuboProblem {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str::<QuboFile>(text)?.into_problem()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&QuboFile::from_problem(self)).expect("qubo file serializes")
    }
}

/// The 5-variable instance used for the hardware marking experiment, `f(x) = xᵀQx`.
pub fn appendix_problem() -> QuboProblem {
    let rows = vec![
        vec![2.0, -1.0, 0.0, -1.0, 0.0],
        vec![-1.0, 1.0, 0.0, 0.0, 0.0],
        vec![0.0, 0.0, 2.0, 0.0, -1.0],
        vec![-1.0, 0.0, 0.0, 2.0, 0.0],
        vec![0.0, 0.0, -1.0, 0.0, 2.0],
    ];
    QuboProblem::new(rows, 0.0, Some(4), ValueMode::Integer).expect("appendix instance is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_problem(rng: &mut ChaCha8Rng, n: usize) -> QuboProblem {
        let mut m = vec![0.0; n * n];
        for j in 0..n {
            for k in j..n {
                let v = rng.gen_range(-4..=4) as f64;
                m[j * n + k] = v;
                m[k * n + j] = v;
            }
        }
        let offset = rng.gen_range(-3..=3) as f64;
        QuboProblem::from_flat(n, m, offset, None, ValueMode::Integer).unwrap()
    }

    // x_0 is the first character of each label; rows are listed in the order of
    // the hardware table, which counts with x_0 as the least significant bit.
    const TABLE_VALUES: [f64; 32] = [
        0., 2., 1., 1., 2., 4., 3., 3., 2., 2., 3., 1., 4., 4., 5., 3., 2., 4., 3., 3., 2., 4., 3., 3., 4., 4., 5., 3.,
        4., 4., 5., 3.,
    ];

    #[test]
    fn appendix_values_match_table() {
        let p = appendix_problem();
        for (row, expected) in TABLE_VALUES.iter().enumerate() {
            let x: Vec<bool> = (0..5).map(|j| (row >> j) & 1 == 1).collect();
            assert_eq!(p.evaluate(&x).unwrap(), *expected, "row {row}");
        }
        assert_eq!(p.evaluate(&bits::parse("01110").unwrap()).unwrap(), 5.0);
        assert_eq!(p.evaluate(&[false; 5]).unwrap(), 0.0);
    }

    #[test]
    fn zero_config_gives_offset() {
        let p = QuboProblem::new(vec![vec![3.0, 1.0], vec![1.0, -2.0]], 7.0, None, ValueMode::Integer).unwrap();
        assert_eq!(p.evaluate(&[false, false]).unwrap(), 7.0);
        assert!(matches!(p.evaluate(&[true]), Err(Error::LengthMismatch { .. })));
    }

    #[test]
    fn appendix_rewrite() {
        let r = appendix_problem().rewrite();
        assert_eq!(r.qj, vec![0.0, 0.0, 1.0, 1.0, 1.0]);
        assert_eq!(r.q_empty, 3.0);
        // constant + three linear terms + three pairs
        assert_eq!(r.m, 7);
    }

    #[test]
    fn diagonal_rewrite() {
        let p = QuboProblem::new(
            vec![vec![3.0, 0.0, 0.0], vec![0.0, -1.0, 0.0], vec![0.0, 0.0, 2.0]],
            0.0,
            None,
            ValueMode::Integer,
        )
        .unwrap();
        let r = p.rewrite();
        assert_eq!(r.qj, vec![3.0, -1.0, 2.0]);
        assert!(r.pair_coeffs.is_empty());
        assert_eq!(r.q_empty, 2.0);
    }

    #[test]
    fn dense_term_count() {
        for n in 1..7 {
            let p = QuboProblem::from_flat(n, vec![1.0; n * n], 0.0, None, ValueMode::Integer).unwrap();
            assert_eq!(p.rewrite().m, (n * n + n + 2) / 2);
        }
    }

    #[test]
    fn upper_triangular_is_symmetrized() {
        let p = QuboProblem::new(vec![vec![1.0, 3.0], vec![0.0, 2.0]], 0.0, None, ValueMode::Integer).unwrap();
        assert_eq!(p.q(0, 1), 1.5);
        assert_eq!(p.q(1, 0), 1.5);
        assert_eq!(p.value_at(0b11), 6.0);
        let bad = QuboProblem::new(vec![vec![1.0, 3.0], vec![2.0, 2.0]], 0.0, None, ValueMode::Integer);
        assert!(matches!(bad, Err(Error::InvalidMatrix(_))));
    }

    #[test]
    fn integer_mode_rejects_fractions() {
        let bad = QuboProblem::new(vec![vec![0.5]], 0.0, None, ValueMode::Integer);
        assert!(bad.is_err());
        assert!(QuboProblem::new(vec![vec![0.5]], 0.0, None, ValueMode::Real).is_ok());
    }

    #[test]
    fn width_overflow_is_reported() {
        let err = QuboProblem::new(vec![vec![4.0]], 0.0, Some(3), ValueMode::Integer).unwrap_err();
        assert!(matches!(err, Error::ValueOverflow { width: 3, .. }));
        let ok = QuboProblem::new(vec![vec![3.0]], -4.0, Some(3), ValueMode::Integer).unwrap();
        assert_eq!(ok.width(), 3);
        // the smallest fitting width is picked by default
        assert_eq!(
            QuboProblem::new(vec![vec![4.0]], 0.0, None, ValueMode::Integer)
                .unwrap()
                .width(),
            4
        );
    }

    #[test]
    fn single_variable_distribution() {
        let p = QuboProblem::new(vec![vec![2.0]], 0.0, None, ValueMode::Integer).unwrap();
        let d = p.distribution().unwrap();
        assert_eq!(d.values, vec![0.0, 2.0]);
        assert_eq!(d.counts, vec![1, 1]);
    }

    #[test]
    fn appendix_maximisers() {
        let p = appendix_problem();
        let table = p.value_table().unwrap();
        let best: Vec<String> = (0..32u64)
            .filter(|&i| table[i as usize] == 5.0)
            .map(|i| bits::format(i, 5))
            .collect();
        assert_eq!(best, vec!["01011", "01110", "01111"]);
        let d = p.distribution().unwrap();
        assert_eq!(d.max(), 5.0);
        assert_eq!(d.count_above(4.0), 3);
    }

    #[test]
    fn distribution_of_random_instance() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let p = random_problem(&mut rng, 12);
        let d = p.distribution().unwrap();
        assert_eq!(d.counts.iter().sum::<u64>(), 4096);
        let cdf: Vec<f64> = d.values.iter().map(|&v| d.cdf(v)).collect();
        assert!(cdf.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(d.cdf(d.max()), 1.0);
        // λ against a direct count
        let table = p.value_table().unwrap();
        for &y in d.values.iter().step_by(3) {
            let direct = table.iter().filter(|&&v| v > y).count() as f64 / 4096.0;
            assert_eq!(d.lambda(y), direct);
        }
    }

    #[test]
    fn enumeration_cap() {
        let p = QuboProblem::from_flat(5, vec![0.0; 25], 0.0, None, ValueMode::Integer).unwrap();
        assert!(matches!(
            p.distribution_capped(4),
            Err(Error::EnumerationCap { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn top_fraction_membership() {
        let p = appendix_problem();
        let d = p.distribution().unwrap();
        assert!(d.in_top_fraction(5.0, 3.0 / 32.0));
        assert!(!d.in_top_fraction(4.0, 3.0 / 32.0));
        assert!(d.in_top_fraction(0.0, 1.0));
        assert_eq!(d.values[d.top_fraction_class(3.0 / 32.0)], 5.0);
    }

    #[test]
    fn json_round_trip_and_flat_matrix() {
        let p = appendix_problem();
        let back = QuboProblem::from_json(&p.to_json()).unwrap();
        assert_eq!(back, p);
        let flat = r#"{"n": 2, "offset": 1, "matrix": [1, 2, 0, 1], "mode": "integer"}"#;
        let q = QuboProblem::from_json(flat).unwrap();
        assert_eq!(q.q(0, 1), 1.0);
        assert_eq!(q.value_at(0b11), 5.0);
    }

    #[test]
    fn shifted_problem_marks_above_threshold() {
        let p = appendix_problem();
        let s = p.shifted(4.0).unwrap();
        for i in 0..32u64 {
            assert_eq!(s.value_at(i), 4.0 - p.value_at(i));
        }
        assert!(p.shifted(4.5).is_err());
    }

    proptest! {
        #[test]
        fn rewrite_reproduces_f(seed in any::<u64>(), n in 1usize..=10) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, n);
            let r = p.rewrite();
            let expected_empty = p.offset()
                + (0..n).map(|j| p.q(j, j)).sum::<f64>() / 4.0
                + p.matrix().iter().sum::<f64>() / 4.0;
            prop_assert_eq!(r.q_empty, expected_empty);
            for i in 0..(1u64 << n) {
                prop_assert_eq!(r.evaluate_index(p.offset(), i), p.value_at(i));
            }
        }

        #[test]
        fn gray_sweep_matches_direct(seed in any::<u64>(), n in 1usize..=9) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = random_problem(&mut rng, n);
            let table = p.value_table().unwrap();
            for (i, v) in table.iter().enumerate() {
                prop_assert_eq!(*v, p.value_at(i as u64));
            }
        }
    }
}
