//! Projective dictionary encoders `|x⟩|y⟩ ↦ e^{iα(x)}|x⟩|y + f(x) mod 2^d⟩`,
//! the threshold marker built from them, and the diffuser.
//!
//! Inside the Fourier basis of the value register, adding `k` is the phase
//! gadget `𝓟_d(k)`. Writing
//! `f(x) = q_∅ + Σ_j q_j (x_j − ½) − Σ_{j<k} Q_jk ((x_j ⊕ x_k) − ½)`
//! every term becomes a gadget on a copy of the Fourier register that has been
//! bit-flipped by the relevant parity, since flipping all bits sends `z` to
//! `−1 − z`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::circuit::{lower, reg, Circuit, Gate};
use crate::error::{Error, Result};
use crate::qubo::{QuboProblem, ValueMode};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderConfig {
    /// Number of terms phased in parallel; 1 is the ancilla-free circuit.
    pub lambda_ancilla: usize,
    /// Cancel the `x`-dependent phase with gates on the input register.
    pub eliminate_garbage_phases: bool,
    /// Use Hadamards instead of the outer (I)QFT; valid when the value register is `|0⟩`.
    pub hadamard_shortcut: bool,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            lambda_ancilla: 1,
            eliminate_garbage_phases: false,
            hadamard_shortcut: false,
        }
    }
}

impl EncoderConfig {
    /// Defaults inside markers, where the value register starts in `|0⟩`.
    pub fn for_marker() -> Self {
        EncoderConfig {
            hadamard_shortcut: true,
            ..Default::default()
        }
    }

    pub fn with_lambda(mut self, lambda: usize) -> Self {
        self.lambda_ancilla = lambda;
        self
    }
}

/// One term of the XOR form, in declaration order.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Term {
    Constant(f64),
    Linear { j: usize, q: f64 },
    Pair { j: usize, k: usize, q: f64 },
}

impl Term {
    /// Amount added by this term's gadget (before the parity flip).
    pub fn gadget_amount(&self) -> f64 {
        match *self {
            Term::Constant(c) => c,
            Term::Linear { q, .. } => -q / 2.0,
            Term::Pair { q, .. } => q / 2.0,
        }
    }

    fn first_index(&self) -> Option<usize> {
        match *self {
            Term::Constant(_) => None,
            Term::Linear { j, .. } | Term::Pair { j, .. } => Some(j),
        }
    }

    /// Position among the terms sharing a first index: linear slot first, then pairs by `k`.
    fn slot_key(&self) -> (usize, usize, usize) {
        match *self {
            Term::Constant(_) => (0, 0, 0),
            Term::Linear { j, .. } => (j, 0, 0),
            Term::Pair { j, k, .. } => (j, 1, k),
        }
    }
}

/// Constant term, nonzero linear terms, then nonzero pairs `(j, k)` in lexicographic order.
pub fn terms(problem: &QuboProblem) -> Vec<Term> {
    let r = problem.rewrite();
    let mut out = vec![Term::Constant(r.q_empty)];
    out.extend(
        r.qj.iter()
            .enumerate()
            .filter(|(_, q)| **q != 0.0)
            .map(|(j, &q)| Term::Linear { j, q }),
    );
    out.extend(r.pair_coeffs.iter().map(|(&(j, k), &q)| Term::Pair { j, k, q }));
    out
}

/// Phase the uncorrected encoder attaches to `|x⟩`: `π(1 − 2^d)/2^d · (f(x) − f(0))`.
pub fn garbage_phase(problem: &QuboProblem, index: u64) -> f64 {
    let n_states = (1u64 << problem.width()) as f64;
    PI * (1.0 - n_states) / n_states * (problem.value_at(index) - problem.offset())
}

/// Gates of `𝓟_d(k)`: qubit `j` (MSB first) gets `πk/2^j`, reduced modulo `2π`.
pub fn gadget_gates(k: f64, qubits: &[usize]) -> Vec<Gate> {
    qubits
        .iter()
        .enumerate()
        .filter_map(|(j, &q)| {
            // k / 2^j is exact for the half-integers that occur here
            let turns = (k / (1u64 << j) as f64).rem_euclid(2.0);
            (turns != 0.0).then_some(Gate::Phase {
                qubit: q,
                angle: PI * turns,
            })
        })
        .filter(|g| !g.is_identity())
        .collect()
}

/// `𝓟_d(k)` on a lone `d`-qubit value register.
pub fn phase_gadget(k: f64, d: usize) -> Circuit {
    let mut c = Circuit::new();
    let y: Vec<usize> = c.add_register(reg::VALUE, d).collect();
    for g in gadget_gates(k, &y) {
        c.add(g);
    }
    c
}

/// Qubit assignment of the encoder registers.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub x: Vec<usize>,
    pub y: Vec<usize>,
    pub anc: Vec<usize>,
}

impl Layout {
    /// Declares `x`, `y` and, for `Λ > 1`, `(Λ − 1)·d` ancillas.
    pub fn allocate(c: &mut Circuit, n: usize, d: usize, lambda: usize) -> Layout {
        let x = c.add_register(reg::INPUT, n).collect();
        let y = c.add_register(reg::VALUE, d).collect();
        let anc = if lambda > 1 {
            c.add_register(reg::ANCILLA, (lambda - 1) * d).collect()
        } else {
            Vec::new()
        };
        Layout { x, y, anc }
    }
}

/// The three pieces of one ancilla batch: parity computation, phases, and uncomputation.
#[derive(Clone, Debug, Default)]
pub struct Batch {
    pub compute: Vec<Gate>,
    pub phases: Vec<Gate>,
    pub uncompute: Vec<Gate>,
}

fn check_encodable(problem: &QuboProblem, lambda: usize) -> Result<usize> {
    if problem.mode() != ValueMode::Integer {
        return Err(Error::Parameter("encoder circuits need an integer-mode problem".into()));
    }
    let m = problem.rewrite().m;
    if lambda < 1 || lambda > m {
        return Err(Error::Parameter(format!("lambda {lambda} outside [1, {m}]")));
    }
    Ok(m)
}

/// Splits the terms into batches of at most `lambda` and builds the gates of each.
pub fn batches(terms: &[Term], lambda: usize, layout: &Layout) -> Vec<Batch> {
    let d = layout.y.len();
    terms
        .chunks(lambda)
        .map(|chunk| {
            let y_pos = chunk.iter().position(|t| matches!(t, Term::Constant(_))).unwrap_or(0);
            let y_term = chunk[y_pos];
            let mut group_terms: Vec<Term> = chunk
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != y_pos)
                .map(|(_, t)| *t)
                .collect();
            group_terms.sort_by_key(Term::slot_key);

            // ancilla for (group g, bit a): j outer, then a, then the slot within j
            let mut group_qubits = vec![vec![0usize; d]; group_terms.len()];
            let mut next = 0;
            let mut start = 0;
            while start < group_terms.len() {
                let j = group_terms[start].first_index();
                let end = (start..group_terms.len())
                    .find(|&g| group_terms[g].first_index() != j)
                    .unwrap_or(group_terms.len());
                for a in 0..d {
                    for row in group_qubits.iter_mut().take(end).skip(start) {
                        row[a] = layout.anc[next];
                        next += 1;
                    }
                }
                start = end;
            }

            let mut compute = Vec::new();
            if !group_terms.is_empty() {
                for a in 0..d {
                    compute.push(Gate::Fanout {
                        control: layout.y[a],
                        targets: group_qubits.iter().map(|g| g[a]).collect(),
                    });
                }
                for stage in [Stage::First, Stage::Second] {
                    for (j, &xq) in layout.x.iter().enumerate() {
                        let targets: Vec<usize> = group_terms
                            .iter()
                            .zip(&group_qubits)
                            .filter(|(t, _)| stage.selects(t, j))
                            .flat_map(|(_, qs)| qs.iter().copied())
                            .collect();
                        if !targets.is_empty() {
                            compute.push(Gate::Fanout { control: xq, targets });
                        }
                    }
                }
            }
            match y_term {
                Term::Constant(_) => {}
                Term::Linear { j, .. } => compute.push(Gate::Fanout {
                    control: layout.x[j],
                    targets: layout.y.clone(),
                }),
                Term::Pair { j, k, .. } => {
                    for v in [j, k] {
                        compute.push(Gate::Fanout {
                            control: layout.x[v],
                            targets: layout.y.clone(),
                        });
                    }
                }
            }

            let mut phases = gadget_gates(y_term.gadget_amount(), &layout.y);
            for (t, qs) in group_terms.iter().zip(&group_qubits) {
                phases.extend(gadget_gates(t.gadget_amount(), qs));
            }
            let uncompute = compute.iter().rev().cloned().collect();
            Batch {
                compute,
                phases,
                uncompute,
            }
        })
        .collect()
}

#[derive(Clone, Copy)]
enum Stage {
    First,
    Second,
}

impl Stage {
    fn selects(self, t: &Term, v: usize) -> bool {
        match (self, *t) {
            (Stage::First, Term::Linear { j, .. }) | (Stage::First, Term::Pair { j, .. }) => j == v,
            (Stage::Second, Term::Pair { k, .. }) => k == v,
            _ => false,
        }
    }
}

/// Gates of `Ũ`: the encoder between the outer Fourier transforms.
pub fn middle_gates(terms: &[Term], lambda: usize, layout: &Layout) -> Vec<Gate> {
    if lambda > 1 {
        return batches(terms, lambda, layout)
            .into_iter()
            .flat_map(|b| b.compute.into_iter().chain(b.phases).chain(b.uncompute))
            .collect();
    }
    let mut gates = Vec::new();
    for t in terms {
        let gadget = gadget_gates(t.gadget_amount(), &layout.y);
        let fan = |v: usize| Gate::Fanout {
            control: layout.x[v],
            targets: layout.y.clone(),
        };
        match *t {
            Term::Constant(_) => gates.extend(gadget),
            Term::Linear { j, .. } => {
                gates.push(fan(j));
                gates.extend(gadget);
                gates.push(fan(j));
            }
            Term::Pair { j, k, .. } => {
                let cnot = Gate::Cnot {
                    control: layout.x[j],
                    target: layout.x[k],
                };
                gates.push(cnot.clone());
                gates.push(fan(k));
                gates.extend(gadget);
                gates.push(fan(k));
                gates.push(cnot);
            }
        }
    }
    gates
}

/// Diagonal gates on `x` contributing `e^{-iα(x)}`, cancelling [`garbage_phase`].
pub fn garbage_correction(problem: &QuboProblem, x: &[usize]) -> Vec<Gate> {
    let n_states = (1u64 << problem.width()) as f64;
    let c = PI * (n_states - 1.0) / n_states;
    let n = problem.n();
    let mut gates = Vec::new();
    for j in 0..n {
        gates.push(Gate::Phase {
            qubit: x[j],
            angle: c * problem.q(j, j),
        });
        for k in j + 1..n {
            gates.push(Gate::CPhase {
                control: x[j],
                target: x[k],
                angle: 2.0 * c * problem.q(j, k),
            });
        }
    }
    gates.retain(|g| !g.is_identity());
    gates
}

fn open_fourier(y: &[usize], shortcut: bool) -> Vec<Gate> {
    if shortcut {
        y.iter().map(|&q| Gate::H { qubit: q }).collect()
    } else {
        vec![Gate::Qft { qubits: y.to_vec() }]
    }
}

fn new_circuit(problem: &QuboProblem, lambda: usize, kind: &str) -> (Circuit, Layout) {
    let mut c = Circuit::new();
    let layout = Layout::allocate(&mut c, problem.n(), problem.width() as usize, lambda);
    c.metadata.insert("kind".into(), kind.into());
    c.metadata.insert("n".into(), problem.n().to_string());
    c.metadata.insert("d".into(), problem.width().to_string());
    c.metadata.insert("lambda".into(), lambda.to_string());
    (c, layout)
}

/// `U_{f,d} = (𝟙 ⊗ QFT†) Ũ (𝟙 ⊗ QFT)`; ancillas start and end in `|0⟩`.
pub fn build_encoder(problem: &QuboProblem, config: &EncoderConfig) -> Result<Circuit> {
    let lambda = config.lambda_ancilla;
    let m = check_encodable(problem, lambda)?;
    let (mut c, layout) = new_circuit(problem, lambda, "encoder");
    c.metadata.insert("m".into(), m.to_string());
    for g in open_fourier(&layout.y, config.hadamard_shortcut) {
        c.add(g);
    }
    for g in middle_gates(&terms(problem), lambda, &layout) {
        c.add(g);
    }
    c.add(Gate::Iqft {
        qubits: layout.y.clone(),
    });
    if config.eliminate_garbage_phases {
        for g in garbage_correction(problem, &layout.x) {
            c.add(g);
        }
    }
    Ok(c)
}

/// `U_QUBO`: the CNOT-fanout network that writes the first batch's parities into the ancillas.
pub fn build_u_qubo(problem: &QuboProblem, config: &EncoderConfig) -> Result<Circuit> {
    first_batch_part(problem, config, |b| b.compute)
}

/// `ℙ_f`: the phase gadgets of the first batch (all terms when `Λ = m`).
pub fn build_phase_block(problem: &QuboProblem, config: &EncoderConfig) -> Result<Circuit> {
    first_batch_part(problem, config, |b| b.phases)
}

fn first_batch_part(
    problem: &QuboProblem,
    config: &EncoderConfig,
    part: impl Fn(Batch) -> Vec<Gate>,
) -> Result<Circuit> {
    let lambda = config.lambda_ancilla;
    check_encodable(problem, lambda)?;
    let (mut c, layout) = new_circuit(problem, lambda, "encoder_part");
    let batch = batches(&terms(problem), lambda, &layout)
        .into_iter()
        .next()
        .unwrap_or_default();
    for g in part(batch) {
        c.add(g);
    }
    Ok(c)
}

/// Reusable threshold marker `S_t(β)` for a fixed layout.
#[derive(Clone, Debug)]
pub struct Marker {
    compute: Vec<Gate>,
    flag: usize,
}

impl Marker {
    /// Marks `x` with `f(x) > threshold` by encoding `f_y = threshold − f` and
    /// phasing its sign bit.
    pub fn new(problem: &QuboProblem, threshold: f64, config: &EncoderConfig, layout: &Layout) -> Result<Self> {
        let shifted = problem.shifted(threshold)?;
        check_encodable(&shifted, config.lambda_ancilla)?;
        let needed = if config.lambda_ancilla > 1 {
            (config.lambda_ancilla - 1) * layout.y.len()
        } else {
            0
        };
        if layout.x.len() != problem.n() || layout.y.len() != problem.width() as usize || layout.anc.len() < needed {
            return Err(Error::InvalidCircuit("marker layout does not match the problem".into()));
        }
        let mut compute = open_fourier(&layout.y, config.hadamard_shortcut);
        compute.extend(middle_gates(&terms(&shifted), config.lambda_ancilla, layout));
        compute.push(Gate::Iqft {
            qubits: layout.y.clone(),
        });
        Ok(Marker {
            compute,
            flag: layout.y[0],
        })
    }

    pub fn append(&self, c: &mut Circuit, beta: f64) {
        for g in &self.compute {
            c.add(g.clone());
        }
        c.add(Gate::Phase {
            qubit: self.flag,
            angle: beta,
        });
        for g in self.compute.iter().rev() {
            c.add(g.inverse());
        }
    }
}

/// `S_t(β)`: multiplies `|x⟩` by `e^{iβ}` exactly when `f(x) > threshold`.
pub fn build_marker(problem: &QuboProblem, threshold: f64, beta: f64, config: &EncoderConfig) -> Result<Circuit> {
    let (mut c, layout) = new_circuit(problem, config.lambda_ancilla, "marker");
    c.metadata.insert("threshold".into(), threshold.to_string());
    let marker = Marker::new(problem, threshold, config, &layout)?;
    marker.append(&mut c, beta);
    Ok(c)
}

/// Appends `S_s(α) = H^n X^n MCP(α) X^n H^n`. With an ancilla the multi-controlled
/// phase is realised as `MCX · Phase · MCX` onto it.
pub fn append_diffuser(c: &mut Circuit, x: &[usize], alpha: f64, ancilla: Option<usize>) {
    for &q in x {
        c.add(Gate::H { qubit: q }).add(Gate::X { qubit: q });
    }
    match ancilla {
        Some(a) if x.len() >= 3 => {
            for g in lower::mcphase_via_ancilla(x, alpha, a) {
                c.add(g);
            }
        }
        _ => {
            c.add(Gate::McPhase {
                qubits: x.to_vec(),
                angle: alpha,
            });
        }
    }
    for &q in x {
        c.add(Gate::X { qubit: q }).add(Gate::H { qubit: q });
    }
}

pub fn build_diffuser(n: usize, alpha: f64) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::Parameter("diffuser needs n >= 1".into()));
    }
    let mut c = Circuit::new();
    let x: Vec<usize> = c.add_register(reg::INPUT, n).collect();
    append_diffuser(&mut c, &x, alpha, None);
    Ok(c)
}

/// Diffuser using one ancilla for the multi-controlled phase.
pub fn build_diffuser_lowered(n: usize, alpha: f64) -> Result<Circuit> {
    if n == 0 {
        return Err(Error::Parameter("diffuser needs n >= 1".into()));
    }
    let mut c = Circuit::new();
    let x: Vec<usize> = c.add_register(reg::INPUT, n).collect();
    let a = c.add_register(reg::DIFFUSER_ANCILLA, 1).start;
    append_diffuser(&mut c, &x, alpha, Some(a));
    Ok(c)
}

/// Marker for an explicit set: one multi-controlled phase per marked configuration.
pub fn append_set_marker(c: &mut Circuit, x: &[usize], marked: &[u64], beta: f64) {
    let n = x.len();
    let mut seen = std::collections::BTreeSet::new();
    for &m in marked {
        if !seen.insert(m) {
            continue;
        }
        let zeros: Vec<usize> = (0..n).filter(|&j| !crate::bits::bit(m, n, j)).map(|j| x[j]).collect();
        for &q in &zeros {
            c.add(Gate::X { qubit: q });
        }
        c.add(Gate::McPhase {
            qubits: x.to_vec(),
            angle: beta,
        });
        for &q in &zeros {
            c.add(Gate::X { qubit: q });
        }
    }
}
