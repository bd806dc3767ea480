//! Fixed-point Grover search: angle sequences, Chebyshev closed forms and circuits.
//!
//! With `L = 2l + 1` and `a = arccosh(1/δ)` the success probability after `l`
//! rounds is `1 − T_L(√(1−λ) T_{1/L}(1/δ))² δ²`. Writing `√(1−λ) = 1/cosh b`
//! with `b = artanh √λ`, the Chebyshev argument is `cosh(a/L)/cosh(b)`, which
//! is evaluated through `sinh` products so that tiny `λ` keeps full precision.

use serde::Serialize;

use crate::circuit::{reg, Circuit, Gate};
use crate::encoder::{append_diffuser, append_set_marker, EncoderConfig, Layout, Marker};
use crate::error::{Error, Result};
use crate::qubo::QuboProblem;

/// `T_order(x)`: `cos(order·arccos x)` on `[−1, 1]`, `cosh(order·arccosh x)` above 1.
/// Below −1 only integer orders are defined.
pub fn chebyshev_t(order: f64, x: f64) -> Result<f64> {
    if !(order >= 0.0) || !x.is_finite() {
        return Err(Error::Domain(format!("T_{order}({x})")));
    }
    if x > 1.0 {
        Ok((order * x.acosh()).cosh())
    } else if x >= -1.0 {
        Ok((order * x.acos()).cos())
    } else if order.fract() == 0.0 {
        let sign = if order % 2.0 == 0.0 { 1.0 } else { -1.0 };
        Ok(sign * (order * (-x).acosh()).cosh())
    } else {
        Err(Error::Domain(format!(
            "fractional order {order} needs x >= -1, got {x}"
        )))
    }
}

fn check_delta(delta: f64) -> Result<()> {
    if delta > 0.0 && delta < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("delta must lie in (0, 1), got {delta}")))
    }
}

/// Smallest `l ≥ 1` with `√(1−λ)·T_{1/(2l+1)}(1/δ) ≤ 1`, i.e. `(2l+1)·artanh √λ ≥ arccosh(1/δ)`.
pub fn l_critical(lambda: f64, delta: f64) -> Result<u64> {
    check_delta(delta)?;
    if !(lambda > 0.0 && lambda <= 1.0) {
        return Err(Error::Parameter(format!("lambda must lie in (0, 1], got {lambda}")));
    }
    if lambda == 1.0 {
        return Ok(1);
    }
    let a = (1.0 / delta).acosh();
    let b = lambda.sqrt().atanh();
    let reaches = |l: u64| (2 * l + 1) as f64 * b >= a;
    let mut l = ((a / b - 1.0) / 2.0).ceil().max(1.0) as u64;
    while !reaches(l) {
        l += 1;
    }
    while l > 1 && reaches(l - 1) {
        l -= 1;
    }
    Ok(l)
}

/// `T_L(√(1−λ)·T_{1/L}(1/δ))²δ²`, the probability that `l` rounds miss the marked set.
pub fn fail_probability(lambda: f64, delta: f64, l: u64) -> f64 {
    if lambda >= 1.0 {
        // √(1−λ) = 0 and T_L(0) = cos(Lπ/2) = 0 for odd L
        return 0.0;
    }
    if lambda <= 0.0 {
        return 1.0;
    }
    let big_l = (2 * l + 1) as f64;
    let a = (1.0 / delta).acosh();
    let b = lambda.sqrt().atanh();
    let u = a / big_l;
    // argument − 1
    let e = 2.0 * ((u + b) / 2.0).sinh() * ((u - b) / 2.0).sinh() / b.cosh();
    let t = if e >= 0.0 {
        (big_l * (e + (e * (e + 2.0)).sqrt()).ln_1p()).cosh()
    } else {
        (big_l * 2.0 * (-e / 2.0).sqrt().min(1.0).asin()).cos()
    };
    t * t * delta * delta
}

/// `ℙ_success = 1 − T_L(√(1−λ)·T_{1/L}(1/δ))²δ²`, clamped to `[0, 1]`.
///
/// `λ = 0` gives 0: with nothing marked there is nothing to find.
pub fn p_success(lambda: f64, delta: f64, l: u64) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    (1.0 - fail_probability(lambda, delta, l)).clamp(0.0, 1.0)
}

/// `α_j = 2·arccot(tan(2πj/L)·tanh(arccosh(1/δ)/L))` for `j = 1..=l`, with
/// `arccot z = atan2(1, z) ∈ (0, π)`.
pub fn angles(delta: f64, l: u64) -> Vec<f64> {
    let big_l = (2 * l + 1) as f64;
    let g = ((1.0 / delta).acosh() / big_l).tanh();
    (1..=l)
        .map(|j| {
            let z = (std::f64::consts::TAU * j as f64 / big_l).tan() * g;
            2.0 * 1f64.atan2(z)
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FpgsParams {
    pub delta: f64,
    pub l: u64,
    /// `α_1..α_l`, the diffuser angles.
    pub angles: Vec<f64>,
}

impl FpgsParams {
    pub fn new(delta: f64, l: u64) -> Result<Self> {
        check_delta(delta)?;
        Ok(FpgsParams {
            delta,
            l,
            angles: angles(delta, l),
        })
    }

    /// Diffuser angle of round `j` (1-based).
    pub fn alpha(&self, j: u64) -> f64 {
        self.angles[(j - 1) as usize]
    }

    /// Marker angle of round `j`: `β_j = α_{l+1−j}`.
    pub fn beta(&self, j: u64) -> f64 {
        self.angles[(self.l - j) as usize]
    }
}

/// `H^n` on `x` followed by `G_j = S_s(α_j)·S_t(β_j)` for `j = 1..=l`.
pub fn build_fpgs_circuit(
    problem: &QuboProblem,
    threshold: f64,
    params: &FpgsParams,
    config: &EncoderConfig,
) -> Result<Circuit> {
    let mut c = Circuit::new();
    let layout = Layout::allocate(&mut c, problem.n(), problem.width() as usize, config.lambda_ancilla);
    let marker = Marker::new(problem, threshold, config, &layout)?;
    c.metadata.insert("kind".into(), "fpgs".into());
    c.metadata.insert("threshold".into(), threshold.to_string());
    c.metadata.insert("delta".into(), params.delta.to_string());
    c.metadata.insert("l".into(), params.l.to_string());
    for &q in &layout.x {
        c.add(Gate::H { qubit: q });
    }
    for j in 1..=params.l {
        marker.append(&mut c, params.beta(j));
        append_diffuser(&mut c, &layout.x, params.alpha(j), None);
    }
    Ok(c)
}

/// FPGS against an explicit marked set, with one multi-controlled phase per element.
pub fn build_fpgs_circuit_for_set(n: usize, marked: &[u64], params: &FpgsParams) -> Result<Circuit> {
    if n == 0 || n > 26 {
        return Err(Error::Parameter(format!("n = {n} outside 1..=26")));
    }
    if let Some(&bad) = marked.iter().find(|&&m| m >> n != 0) {
        return Err(Error::Parameter(format!(
            "marked configuration {bad} has more than {n} bits"
        )));
    }
    let mut c = Circuit::new();
    let x: Vec<usize> = c.add_register(reg::INPUT, n).collect();
    for &q in &x {
        c.add(Gate::H { qubit: q });
    }
    for j in 1..=params.l {
        append_set_marker(&mut c, &x, marked, params.beta(j));
        append_diffuser(&mut c, &x, params.alpha(j), None);
    }
    Ok(c)
}
