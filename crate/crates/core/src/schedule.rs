//! Hyperparameter optimisation for FPGS: the known-λ cost `τ_δ` and the
//! geometric-schedule bound `τ_{δ,α}` with its phase portrait.

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpgs::{fail_probability, l_critical, p_success};

/// Geometric growth schedule: round `s` runs FPGS with `⌈α^{s−1}⌉` queries.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ScheduleParams {
    pub delta: f64,
    pub alpha: f64,
}

impl ScheduleParams {
    pub const DEFAULT_DELTA: f64 = 0.4038;
    pub const DEFAULT_ALPHA: f64 = 1.975;

    pub fn new(delta: f64, alpha: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::Parameter(format!("delta must lie in (0, 1), got {delta}")));
        }
        if !(alpha > 1.0) || !alpha.is_finite() {
            return Err(Error::Parameter(format!("alpha must be > 1, got {alpha}")));
        }
        Ok(ScheduleParams { delta, alpha })
    }

    /// `αδ² < 1`, needed for the geometric tail to converge.
    pub fn tail_converges(&self) -> bool {
        self.alpha * self.delta * self.delta < 1.0
    }

    pub fn round_queries(&self, s: u32) -> u64 {
        round_queries(self.alpha, s)
    }
}

impl Default for ScheduleParams {
    fn default() -> Self {
        ScheduleParams {
            delta: Self::DEFAULT_DELTA,
            alpha: Self::DEFAULT_ALPHA,
        }
    }
}

/// `⌈α^{s−1}⌉` for round `s ≥ 1`. A relative slack of 1e-12 keeps exact powers
/// such as `2^k` from being bumped up by rounding.
pub fn round_queries(alpha: f64, s: u32) -> u64 {
    assert!(s >= 1, "rounds are numbered from 1");
    let v = alpha.powi(s as i32 - 1);
    (v * (1.0 - 1e-12)).ceil().max(1.0) as u64
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda < 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!("lambda must lie in (0, 1), got {lambda}")))
    }
}

/// `τ_δ = √λ · l_crit / ℙ_success(l_crit)`.
pub fn tau_known_lambda(delta: f64, lambda: f64) -> Result<f64> {
    check_lambda(lambda)?;
    let l = l_critical(lambda, delta)?;
    Ok(lambda.sqrt() * l as f64 / p_success(lambda, delta, l))
}

/// `lim_{λ→0} τ_δ = arccosh(1/δ) / (2(1 − δ²))`, with the ceiling removed.
pub fn tau_known_lambda_limit(delta: f64) -> f64 {
    (1.0 / delta).acosh() / (2.0 * (1.0 - delta * delta))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DeltaOptimum {
    pub delta: f64,
    pub tau: f64,
}

/// Golden-section search for a minimum of `f` on `[lo, hi]`.
pub fn golden_section(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc <= fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    (lo + hi) / 2.0
}

/// Evenly spaced points `lo, lo + step, …` up to `hi` (inclusive within rounding).
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n).map(|i| lo + i as f64 * step).collect()
}

/// Minimises a step-shaped objective: coarse scan, golden section inside the best
/// bracket, then a fine grid around the result.
fn minimise_stepped(f: impl Fn(f64) -> f64 + Sync, lo: f64, hi: f64) -> DeltaOptimum {
    let coarse = 0.005;
    let start = grid(lo, hi, coarse)
        .into_par_iter()
        .map(|d| (f(d), d))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .expect("non-empty range")
        .1;
    let (a, b) = ((start - coarse).max(lo), (start + coarse).min(hi));
    let centre = golden_section(&f, a, b, 1e-4);
    let fine = 1e-5;
    let (delta, tau) = grid((centre - 0.01).max(lo), (centre + 0.01).min(hi), fine)
        .into_par_iter()
        .chain([start, centre])
        .map(|d| (d, f(d)))
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
        .expect("non-empty range");
    DeltaOptimum { delta, tau }
}

/// Exact minimiser of `τ_δ` at fixed `λ` over `δ ∈ [lo, hi]`.
///
/// `l_crit(δ)` is a decreasing step function: it equals `l` on the plateau
/// `1/cosh((2l+1)b) ≤ δ < 1/cosh((2l−1)b)` with `b = artanh √λ`. On each
/// plateau `τ_δ = √λ l / ℙ_success(λ, δ, l)` is smooth, so every plateau is
/// minimised separately and the best one wins. The minima sit at plateau edges
/// and many edges lie within `1e-5` of the optimum, so a plain grid misses them.
/// When there are too many plateaus a coarse scan first narrows the range to
/// `±0.01` around the best grid point.
pub fn optimize_known_lambda(lambda: f64, lo: f64, hi: f64) -> Result<DeltaOptimum> {
    check_lambda(lambda)?;
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Error::Parameter(format!("invalid delta range [{lo}, {hi}]")));
    }
    const MAX_PLATEAUS: u64 = 200_000;
    let (mut lo, mut hi) = (lo, hi);
    if l_critical(lambda, lo)? - l_critical(lambda, hi)? > MAX_PLATEAUS {
        let coarse = minimise_stepped(|d| tau_known_lambda(d, lambda).unwrap_or(f64::INFINITY), lo, hi);
        lo = (coarse.delta - 0.01).max(lo);
        hi = (coarse.delta + 0.01).min(hi);
    }
    let b = lambda.sqrt().atanh();
    let root = lambda.sqrt();
    let (l_min, l_max) = (l_critical(lambda, hi)?, l_critical(lambda, lo)?);
    let best = (l_min..=l_max)
        .into_par_iter()
        .filter_map(|l| {
            let edge = |k: u64| 1.0 / (k as f64 * b).cosh();
            let left = lo.max(edge(2 * l + 1));
            let right = if l == 1 { hi } else { hi.min(edge(2 * l - 1)) };
            // stay strictly inside so rounding cannot flip l_crit
            let (left, right) = (left * (1.0 + 1e-12), right * (1.0 - 1e-12));
            if left >= right {
                return None;
            }
            let tau = |d: f64| root * l as f64 / p_success(lambda, d, l);
            let mid = golden_section(tau, left, right, (right - left) * 1e-9);
            [left, mid, right]
                .into_iter()
                .map(|d| (d, tau(d)))
                .min_by(|x, y| x.1.total_cmp(&y.1))
        })
        .min_by(|x, y| x.1.total_cmp(&y.1).then(x.0.total_cmp(&y.0)))
        .ok_or_else(|| Error::Parameter("empty delta range".into()))?;
    Ok(DeltaOptimum {
        delta: best.0,
        tau: tau_known_lambda(best.0, lambda)?,
    })
}

/// Minimiser of the ceiling-free limit `τ_δ` (smooth, so golden section suffices).
pub fn optimize_known_lambda_limit(lo: f64, hi: f64) -> Result<DeltaOptimum> {
    if !(0.0 < lo && lo < hi && hi < 1.0) {
        return Err(Error::Parameter(format!("invalid delta range [{lo}, {hi}]")));
    }
    let delta = golden_section(tau_known_lambda_limit, lo, hi, 1e-10);
    Ok(DeltaOptimum {
        delta,
        tau: tau_known_lambda_limit(delta),
    })
}

/// Upper bound on `τ_{δ,α}`, split into an exact head and a geometric tail.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScheduleBound {
    pub lambda: f64,
    pub delta: f64,
    pub alpha: f64,
    pub l_crit: u64,
    /// First round with `l_s ≥ l_crit`.
    pub s0: u32,
    /// Round where the tail takes over (`s0` unless a later cutoff was requested).
    pub cutoff: u32,
    /// `√λ Σ_{s<cutoff} l_s Q_s`.
    pub head: f64,
    /// `√λ Q_cutoff (α^{cutoff−1}/(1−αδ²) + 1/(1−δ²))`.
    pub tail: f64,
    pub bound: f64,
    /// `ℙ(FPGS_{δ,l_s} fails)` for `s = 1..cutoff`.
    pub fail_probabilities: Vec<f64>,
}

/// The bound with the tail attached at `s0`.
pub fn tau_schedule_bound(params: &ScheduleParams, lambda: f64) -> Result<ScheduleBound> {
    tau_schedule_bound_with_cutoff(params, lambda, 0)
}

/// The bound with the head extended `extra` rounds past `s0` before the tail
/// takes over. For `s ≥ s0` every round fails with probability at most `δ²`,
/// so `Q_s ≤ Q_cutoff δ^{2(s−cutoff)}`, and `⌈α^{s−1}⌉ ≤ α^{s−1} + 1`.
pub fn tau_schedule_bound_with_cutoff(params: &ScheduleParams, lambda: f64, extra: u32) -> Result<ScheduleBound> {
    check_lambda(lambda)?;
    if !params.tail_converges() {
        return Err(Error::Parameter(format!(
            "alpha * delta^2 = {} must be < 1",
            params.alpha * params.delta * params.delta
        )));
    }
    let ScheduleParams { delta, alpha } = *params;
    let l_crit = l_critical(lambda, delta)?;
    let mut s0 = 1u32;
    while round_queries(alpha, s0) < l_crit {
        s0 += 1;
    }
    let cutoff = s0 + extra;
    let mut q = 1.0;
    let mut head = 0.0;
    let mut fails = Vec::with_capacity(cutoff as usize);
    for s in 1..cutoff {
        let l = round_queries(alpha, s);
        head += l as f64 * q;
        let p = fail_probability(lambda, delta, l);
        fails.push(p);
        q *= p;
    }
    let d2 = delta * delta;
    let tail = q * (alpha.powi(cutoff as i32 - 1) / (1.0 - alpha * d2) + 1.0 / (1.0 - d2));
    let root = lambda.sqrt();
    Ok(ScheduleBound {
        lambda,
        delta,
        alpha,
        l_crit,
        s0,
        cutoff,
        head: root * head,
        tail: root * tail,
        bound: root * (head + tail),
        fail_probabilities: fails,
    })
}

/// `τ_{δ,α} = √λ Σ_s ⌈α^{s−1}⌉ Q_s` summed until the remaining tail bound is negligible.
pub fn tau_schedule_exact(params: &ScheduleParams, lambda: f64) -> Result<f64> {
    let lead = tau_schedule_bound(params, lambda)?;
    let ScheduleParams { delta, alpha } = *params;
    let d2 = delta * delta;
    let (mut q, mut sum) = (1.0, 0.0);
    for s in 1u32.. {
        let l = round_queries(alpha, s);
        if s >= lead.s0 {
            let rest = q * (alpha.powi(s as i32 - 1) / (1.0 - alpha * d2) + 1.0 / (1.0 - d2));
            if rest <= 1e-15 * sum || s > 4000 {
                break;
            }
        }
        sum += l as f64 * q;
        q *= fail_probability(lambda, delta, l);
    }
    Ok(lambda.sqrt() * sum)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct PortraitCell {
    pub delta: f64,
    pub alpha: f64,
    /// `None` where `αδ² ≥ 1`.
    pub tau: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhasePortrait {
    pub lambda: f64,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Row-major: `cells[i * alphas.len() + j]` is `(deltas[i], alphas[j])`.
    pub cells: Vec<PortraitCell>,
}

impl PhasePortrait {
    pub fn minimum(&self) -> Option<PortraitCell> {
        self.cells
            .iter()
            .filter(|c| c.tau.is_some())
            .min_by(|a, b| a.tau.unwrap().total_cmp(&b.tau.unwrap()))
            .copied()
    }

    pub fn get(&self, i: usize, j: usize) -> &PortraitCell {
        &self.cells[i * self.alphas.len() + j]
    }

    /// `delta,alpha,tau,valid` rows; invalid cells leave `tau` empty.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("delta,alpha,tau,valid\n");
        for c in &self.cells {
            match c.tau {
                Some(t) => out.push_str(&format!("{},{},{},true\n", fmt12(c.delta), fmt12(c.alpha), fmt12(t))),
                None => out.push_str(&format!("{},{},,false\n", fmt12(c.delta), fmt12(c.alpha))),
            }
        }
        out
    }
}

/// 12 significant digits, trailing zeros trimmed.
pub fn fmt12(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let s = format!("{:.*e}", 11, v);
    let (mant, exp) = s.split_once('e').expect("exponent form");
    let exp: i32 = exp.parse().expect("integer exponent");
    if (-5..15).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        let t = format!("{:.*}", decimals, v);
        if t.contains('.') {
            t.trim_end_matches('0').trim_end_matches('.').to_string()
        } else {
            t
        }
    } else {
        let mant = mant.trim_end_matches('0').trim_end_matches('.');
        format!("{mant}e{exp}")
    }
}

/// `τ_{δ,α}` bound on every `(δ, α)` cell; cells with `αδ² ≥ 1` are flagged invalid.
pub fn phase_portrait(deltas: &[f64], alphas: &[f64], lambda: f64) -> Result<PhasePortrait> {
    check_lambda(lambda)?;
    if let Some(d) = deltas.iter().find(|d| !(**d > 0.0 && **d < 1.0)) {
        return Err(Error::Parameter(format!("delta {d} outside (0, 1)")));
    }
    if let Some(a) = alphas.iter().find(|a| !(**a > 1.0)) {
        return Err(Error::Parameter(format!("alpha {a} must be > 1")));
    }
    let cells = deltas
        .par_iter()
        .flat_map_iter(|&delta| {
            alphas.iter().map(move |&alpha| {
                let params = ScheduleParams { delta, alpha };
                let tau = if params.tail_converges() {
                    tau_schedule_bound(&params, lambda).ok().map(|b| b.bound)
                } else {
                    None
                };
                PortraitCell { delta, alpha, tau }
            })
        })
        .collect();
    Ok(PhasePortrait {
        lambda,
        deltas: deltas.to_vec(),
        alphas: alphas.to_vec(),
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const CONJ: ScheduleParams = ScheduleParams {
        delta: 0.4038,
        alpha: 1.975,
    };

    #[test]
    fn round_query_counts() {
        assert_eq!(round_queries(2.0, 1), 1);
        assert_eq!(round_queries(2.0, 11), 1024);
        let want = [1, 2, 4, 8, 16, 31, 60, 118, 232, 458];
        for (s, w) in want.iter().enumerate() {
            // 1.975^k by repeated multiplication
            let v: f64 = (0..s).fold(1.0, |acc, _| acc * 1.975);
            assert_eq!(v.ceil() as u64, *w);
            assert_eq!(round_queries(1.975, s as u32 + 1), *w);
        }
    }

    #[test]
    fn known_lambda_ladder() {
        let lam = 2f64.powi(-20);
        let opt = optimize_known_lambda(lam, 0.3, 0.9).unwrap();
        assert!(opt.tau > std::f64::consts::FRAC_PI_4 && opt.tau < 2.25);
        assert!((opt.tau - 0.8582).abs() < 0.002, "{opt:?}");
        // brute-force oracle on a fine grid
        let brute = grid(0.55, 0.65, 1e-5)
            .into_iter()
            .map(|d| tau_known_lambda(d, lam).unwrap())
            .fold(f64::INFINITY, f64::min);
        assert!(opt.tau <= brute + 1e-12);
        let stable =
            (tau_known_lambda(opt.delta, lam).unwrap() - tau_known_lambda(opt.delta, 2f64.powi(-24)).unwrap()).abs();
        assert!(stable < 0.01);
    }

    #[test]
    fn limit_optimum() {
        let opt = optimize_known_lambda_limit(0.3, 0.9).unwrap();
        assert!((opt.delta - 0.6049).abs() < 0.002, "{opt:?}");
        assert!((opt.tau - 0.8582).abs() < 0.0005);
        // derivative of the limit objective vanishes at the optimum
        let h = 1e-6;
        let slope = (tau_known_lambda_limit(opt.delta + h) - tau_known_lambda_limit(opt.delta - h)) / (2.0 * h);
        assert!(slope.abs() < 1e-4);
        // finite-λ values approach the limit
        let gap = (tau_known_lambda(opt.delta, 2f64.powi(-40)).unwrap() - opt.tau).abs();
        assert!(gap < 1e-5);
    }

    #[test]
    fn conjecture_parameters() {
        let b = tau_schedule_bound(&CONJ, 2f64.powi(-40)).unwrap();
        assert!(b.bound >= 1.42 && b.bound <= 1.434, "{}", b.bound);
        assert!(b.fail_probabilities.iter().all(|p| (0.0..=1.0).contains(p)));
        assert!(round_queries(1.975, b.s0) >= b.l_crit);
        assert!(round_queries(1.975, b.s0 - 1) < b.l_crit);
        let exact = tau_schedule_exact(&CONJ, 2f64.powi(-40)).unwrap();
        assert!(exact <= b.bound + 1e-12);
    }

    #[test]
    fn bound_near_one() {
        let b = tau_schedule_bound(&CONJ, 0.9).unwrap();
        assert!(b.bound.is_finite());
        assert!(b.bound >= 0.9f64.sqrt());
    }

    #[test]
    fn invalid_tail() {
        assert!(tau_schedule_bound(&ScheduleParams { delta: 0.9, alpha: 2.0 }, 1e-6).is_err());
        assert!(ScheduleParams::new(0.5, 1.0).is_err());
    }

    #[test]
    fn cutoff_is_nonincreasing() {
        for lam in [1e-3, 2f64.powi(-20), 2f64.powi(-40)] {
            let mut prev = f64::INFINITY;
            for extra in 0..12 {
                let b = tau_schedule_bound_with_cutoff(&CONJ, lam, extra).unwrap();
                assert!(b.bound <= prev * (1.0 + 1e-12));
                prev = b.bound;
            }
            let exact = tau_schedule_exact(&CONJ, lam).unwrap();
            assert!(exact <= prev * (1.0 + 1e-12));
            assert!(prev - exact < 1e-6 * exact.max(1.0) + 1e-3);
        }
    }

    #[test]
    fn single_cell_portrait() {
        let p = phase_portrait(&[0.4038], &[1.975], 2f64.powi(-40)).unwrap();
        let t = p.get(0, 0).tau.unwrap();
        assert!((t - 1.433).abs() < 0.002);
        let p = phase_portrait(&[0.8], &[2.0], 1e-6).unwrap();
        assert!(p.cells[0].tau.is_none());
        assert!(p.to_csv().ends_with("0.8,2,,false\n"));
    }

    #[test]
    fn twelve_digit_formatting() {
        assert_eq!(fmt12(1.0), "1");
        assert_eq!(fmt12(0.4038), "0.4038");
        assert_eq!(fmt12(1.0 / 3.0), "0.333333333333");
        assert_eq!(fmt12(2f64.powi(-40)), "9.09494701773e-13");
        assert_eq!(fmt12(-1234.5), "-1234.5");
    }

    proptest! {
        #[test]
        fn bound_dominates_exact(delta in 0.2f64..0.6, alpha in 1.2f64..2.5, lexp in 2.0f64..30.0) {
            let params = ScheduleParams::new(delta, alpha).unwrap();
            prop_assume!(params.tail_converges());
            let lam = 2f64.powf(-lexp);
            let b = tau_schedule_bound(&params, lam).unwrap();
            let exact = tau_schedule_exact(&params, lam).unwrap();
            prop_assert!(exact <= b.bound * (1.0 + 1e-12));
            prop_assert!(exact >= lam.sqrt());
        }

        #[test]
        fn known_lambda_meets_target(delta in 0.05f64..0.95, lexp in 1.0f64..30.0) {
            let lam = 2f64.powf(-lexp);
            let tau = tau_known_lambda(delta, lam).unwrap();
            let l = l_critical(lam, delta).unwrap();
            prop_assert!(tau >= lam.sqrt() * l as f64);
            prop_assert!(tau <= lam.sqrt() * l as f64 / (1.0 - delta * delta) + 1e-12);
        }
    }
}
