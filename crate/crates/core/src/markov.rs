//! Exact evolution of the best-seen-value distribution for FPGS-based adaptive
//! search and for Grover adaptive search (GAS).
//!
//! Both kernels depend on a configuration only through its value, so the
//! `2^n`-state chain lumps onto the distinct values. From class `v` a round
//! succeeds with probability `p_v`, and on success the new configuration is
//! uniform over `{x : f(x) > v}`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::fpgs::p_success;
use crate::qubo::ValueDistribution;
use crate::schedule::{fmt12, round_queries, ScheduleParams};

/// Probability vector over the value classes of a distribution.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChainState {
    pub values: Vec<f64>,
    pub prob: Vec<f64>,
    pub round: u32,
    /// Query count (`l` or `m`) used in each completed round.
    pub schedule: Vec<u64>,
}

impl ChainState {
    /// `p_0(y) = 1/2^n`: a uniformly random first configuration.
    pub fn uniform(dist: &ValueDistribution) -> Self {
        ChainState {
            values: dist.values.clone(),
            prob: dist.probabilities(),
            round: 0,
            schedule: Vec::new(),
        }
    }

    pub fn point(dist: &ValueDistribution, class: usize) -> Self {
        let mut prob = vec![0.0; dist.num_classes()];
        prob[class] = 1.0;
        ChainState {
            values: dist.values.clone(),
            prob,
            round: 0,
            schedule: Vec::new(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().zip(&self.prob).map(|(v, p)| v * p).sum()
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.values
            .iter()
            .zip(&self.prob)
            .map(|(v, p)| (v - m).powi(2) * p)
            .sum()
    }

    pub fn top_probability(&self) -> f64 {
        *self.prob.last().unwrap_or(&0.0)
    }

    /// Checks that `prob` is a distribution within `tol`.
    pub fn validate(&self, tol: f64) -> Result<()> {
        let total: f64 = self.prob.iter().sum();
        if (total - 1.0).abs() > tol || self.prob.iter().any(|&p| p < -tol) {
            return Err(Error::Invariant(format!("chain state sums to {total}")));
        }
        Ok(())
    }
}

/// One round of the lumped chain with per-class success probabilities `success[v]`.
pub fn lumped_step(dist: &ValueDistribution, prob: &[f64], success: &[f64]) -> Vec<f64> {
    let k = dist.num_classes();
    let mut above = vec![0u64; k];
    let mut acc = 0;
    for v in (0..k).rev() {
        above[v] = acc;
        acc += dist.counts[v];
    }
    let mut out = vec![0.0; k];
    // mass each configuration receives from all lower classes so far
    let mut inflow_rate = 0.0;
    for v in 0..k {
        out[v] += inflow_rate * dist.counts[v] as f64;
        let p = if above[v] == 0 { 0.0 } else { success[v] };
        out[v] += prob[v] * (1.0 - p);
        if above[v] > 0 {
            inflow_rate += prob[v] * p / above[v] as f64;
        }
    }
    out
}

fn fpgs_success_by_class(dist: &ValueDistribution, delta: f64, l: u64) -> Vec<f64> {
    dist.values
        .iter()
        .map(|&v| p_success(dist.lambda(v), delta, l))
        .collect()
}

fn gas_success_by_class(dist: &ValueDistribution, m: u64) -> Vec<f64> {
    dist.values.iter().map(|&v| gas_success(dist.lambda(v), m)).collect()
}

/// One FPGS round with `l` queries: `ℙ_FPGS,y,δ,l = 1 − T_{2l+1}(T_{1/(2l+1)}(1/δ)√(1−F(y)))²δ²`.
pub fn fpgs_transition(dist: &ValueDistribution, state: &ChainState, delta: f64, l: u64) -> ChainState {
    let prob = lumped_step(dist, &state.prob, &fpgs_success_by_class(dist, delta, l));
    let mut schedule = state.schedule.clone();
    schedule.push(l);
    ChainState {
        values: state.values.clone(),
        prob,
        round: state.round + 1,
        schedule,
    }
}

/// One GAS round whose iterate count is uniform on `[0, m)`.
pub fn gas_transition(dist: &ValueDistribution, state: &ChainState, m: u64) -> ChainState {
    let prob = lumped_step(dist, &state.prob, &gas_success_by_class(dist, m));
    let mut schedule = state.schedule.clone();
    schedule.push(m);
    ChainState {
        values: state.values.clone(),
        prob,
        round: state.round + 1,
        schedule,
    }
}

pub fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-8 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `½(1 − sinc(4mθ)/sinc(2θ))`.
pub fn gas_success_formula(theta: f64, m: u64) -> f64 {
    0.5 * (1.0 - sinc(4.0 * m as f64 * theta) / sinc(2.0 * theta))
}

/// `(1/m) Σ_{j<m} sin²((2j+1)θ)`.
pub fn gas_success_direct(theta: f64, m: u64) -> f64 {
    (0..m).map(|j| ((2 * j + 1) as f64 * theta).sin().powi(2)).sum::<f64>() / m as f64
}

/// Average Grover success with `θ = arcsin √λ` and an iterate count uniform on `[0, m)`.
/// Falls back to the direct average where `sinc(2θ)` vanishes (`λ` near 1).
pub fn gas_success(lambda: f64, m: u64) -> f64 {
    if lambda <= 0.0 || m == 0 {
        return 0.0;
    }
    let theta = lambda.min(1.0).sqrt().asin();
    let p = if (2.0 * theta).sin().abs() < 1e-6 {
        gas_success_direct(theta, m)
    } else {
        gas_success_formula(theta, m)
    };
    p.clamp(0.0, 1.0)
}

/// One step of the unlumped chain on `2^n` configurations: from `x`, success
/// (probability `success(λ(f(x)))`) lands uniformly on `{y : f(y) > f(x)}`.
pub fn full_chain_step(table: &[f64], prob: &[f64], success: impl Fn(f64) -> f64) -> Vec<f64> {
    let n_states = table.len();
    let mut out = vec![0.0; n_states];
    for x in 0..n_states {
        if prob[x] == 0.0 {
            continue;
        }
        let better: Vec<usize> = (0..n_states).filter(|&y| table[y] > table[x]).collect();
        if better.is_empty() {
            out[x] += prob[x];
            continue;
        }
        let p = success(better.len() as f64 / n_states as f64);
        out[x] += prob[x] * (1.0 - p);
        let share = prob[x] * p / better.len() as f64;
        for y in better {
            out[y] += share;
        }
    }
    out
}

/// Sums a configuration distribution over value classes.
pub fn project(dist: &ValueDistribution, table: &[f64], prob: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dist.num_classes()];
    for (v, p) in table.iter().zip(prob) {
        out[dist.class_of(*v).expect("value from the same table")] += p;
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BenchmarkConfig {
    pub rounds: u32,
    pub params: ScheduleParams,
    /// GAS iterate bound grows as `m_s = ⌈g^{s−1}⌉`.
    pub gas_growth: f64,
}

impl Default for BenchmarkConfig {
    fn default() -> Self {
        BenchmarkConfig {
            rounds: 4,
            params: ScheduleParams::default(),
            gas_growth: 1.2,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundStats {
    pub round: u32,
    /// `l` for FPGS, `m` for GAS; 0 for the initial random pick.
    pub queries: u64,
    pub cumulative_queries: u64,
    /// Expected queries actually spent: `l` for FPGS, `(m−1)/2` for GAS.
    pub expected_queries: f64,
    pub mean: f64,
    pub mean_pct: f64,
    /// Standard deviation as a percentage of the maximum.
    pub std_pct: f64,
    pub top_probability: f64,
    /// `top_probability / (|argmax| / 2^n)`.
    pub amplification: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MethodReport {
    pub method: String,
    pub stats: Vec<RoundStats>,
    /// Class distribution after each round, round 0 first.
    pub distributions: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchmarkReport {
    pub n: usize,
    pub values: Vec<f64>,
    pub counts: Vec<u64>,
    pub config: BenchmarkConfig,
    pub fpgs: MethodReport,
    pub gas: MethodReport,
}

fn stats_of(dist: &ValueDistribution, state: &ChainState, queries: u64, cumulative: u64, expected: f64) -> RoundStats {
    let max = dist.max();
    let baseline = *dist.counts.last().unwrap() as f64 / dist.total() as f64;
    let mean = state.mean();
    RoundStats {
        round: state.round,
        queries,
        cumulative_queries: cumulative,
        expected_queries: expected,
        mean,
        mean_pct: 100.0 * mean / max,
        std_pct: 100.0 * state.variance().max(0.0).sqrt() / max,
        top_probability: state.top_probability(),
        amplification: state.top_probability() / baseline,
    }
}

fn run_method(
    dist: &ValueDistribution,
    name: &str,
    rounds: u32,
    schedule: impl Fn(u32) -> u64,
    expected: impl Fn(u64) -> f64,
    step: impl Fn(&ChainState, u64) -> ChainState,
) -> MethodReport {
    let mut state = ChainState::uniform(dist);
    let mut stats = vec![stats_of(dist, &state, 0, 0, 0.0)];
    let mut distributions = vec![state.prob.clone()];
    let mut cumulative = 0;
    let mut spent = 0.0;
    for s in 1..=rounds {
        let q = schedule(s);
        state = step(&state, q);
        cumulative += q;
        spent += expected(q);
        stats.push(stats_of(dist, &state, q, cumulative, spent));
        distributions.push(state.prob.clone());
    }
    MethodReport {
        method: name.to_string(),
        stats,
        distributions,
    }
}

/// Runs both chains from the uniform distribution for `config.rounds` rounds.
pub fn benchmark(dist: &ValueDistribution, config: &BenchmarkConfig) -> Result<BenchmarkReport> {
    let p = ScheduleParams::new(config.params.delta, config.params.alpha)?;
    if !(config.gas_growth > 1.0) {
        return Err(Error::Parameter(format!(
            "gas growth must be > 1, got {}",
            config.gas_growth
        )));
    }
    let fpgs = run_method(
        dist,
        "fpgs",
        config.rounds,
        |s| round_queries(p.alpha, s),
        |l| l as f64,
        |st, l| fpgs_transition(dist, st, p.delta, l),
    );
    let gas = run_method(
        dist,
        "gas",
        config.rounds,
        |s| round_queries(config.gas_growth, s),
        |m| (m as f64 - 1.0) / 2.0,
        |st, m| gas_transition(dist, st, m),
    );
    Ok(BenchmarkReport {
        n: dist.n,
        values: dist.values.clone(),
        counts: dist.counts.clone(),
        config: *config,
        fpgs,
        gas,
    })
}

impl BenchmarkReport {
    /// One row per method and round.
    pub fn stats_csv(&self) -> String {
        let mut out = String::from(
            "method,round,queries,cumulative_queries,expected_queries,mean,mean_pct,std_pct,top_probability,amplification\n",
        );
        for m in [&self.fpgs, &self.gas] {
            for s in &m.stats {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{},{},{},{}\n",
                    m.method,
                    s.round,
                    s.queries,
                    s.cumulative_queries,
                    fmt12(s.expected_queries),
                    fmt12(s.mean),
                    fmt12(s.mean_pct),
                    fmt12(s.std_pct),
                    fmt12(s.top_probability),
                    fmt12(s.amplification)
                ));
            }
        }
        out
    }

    /// Histogram data: one row per method, round and value class.
    pub fn distributions_csv(&self) -> String {
        let mut out = String::from("method,round,value,count,probability\n");
        for m in [&self.fpgs, &self.gas] {
            for (r, d) in m.distributions.iter().enumerate() {
                for ((v, c), p) in self.values.iter().zip(&self.counts).zip(d) {
                    out.push_str(&format!("{},{},{},{},{}\n", m.method, r, fmt12(*v), c, fmt12(*p)));
                }
            }
        }
        out
    }
}

/// Expected total queries of the geometric schedule until the best value lies
/// in the top `ε` fraction, starting from a uniformly random configuration.
/// Classes in the top fraction are absorbing; the series is summed until the
/// surviving mass is below `1e-15` (error if that takes more than `max_rounds`).
pub fn expected_queries_to_top_fraction_exact(
    dist: &ValueDistribution,
    params: &ScheduleParams,
    epsilon: f64,
    max_rounds: u32,
) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    let top = dist.top_fraction_class(epsilon);
    let mut state = ChainState::uniform(dist);
    let mut expected = 0.0;
    for s in 1..=max_rounds {
        let alive: f64 = state.prob[..top].iter().sum();
        if alive < 1e-15 {
            return Ok(expected);
        }
        let l = round_queries(params.alpha, s);
        expected += l as f64 * alive;
        state = fpgs_transition(dist, &state, params.delta, l);
    }
    Err(Error::Parameter(format!(
        "absorption did not converge within {max_rounds} rounds"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use proptest::prelude::*;

    fn toy() -> (Vec<f64>, ValueDistribution) {
        let table = vec![0.0, 1.0, 1.0, 3.0, 0.0, 2.0, 3.0, 1.0];
        let d = ValueDistribution::from_values(3, table.clone());
        (table, d)
    }

    #[test]
    fn max_class_is_fixed_point() {
        let (_, d) = toy();
        let s = ChainState::point(&d, d.num_classes() - 1);
        assert_eq!(fpgs_transition(&d, &s, 0.4, 7).prob, s.prob);
        assert_eq!(gas_transition(&d, &s, 5).prob, s.prob);
    }

    #[test]
    fn one_bit_hand_check() {
        let d = ValueDistribution::from_values(1, vec![0.0, 1.0]);
        let s = ChainState::point(&d, 0);
        let next = fpgs_transition(&d, &s, 0.5, 2);
        let p = p_success(0.5, 0.5, 2);
        assert!((next.prob[1] - p).abs() < 1e-15);
        assert!((next.prob[0] - (1.0 - p)).abs() < 1e-15);
        // GAS with m = 1 never iterates: success is λ
        let g = gas_transition(&d, &s, 1);
        assert!((g.prob[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn gas_formula_matches_direct_average() {
        for i in 1..=100 {
            let theta = i as f64 / 101.0 * std::f64::consts::FRAC_PI_2;
            for m in 1..=64 {
                let (a, b) = (gas_success_formula(theta, m), gas_success_direct(theta, m));
                assert!((a - b).abs() < 1e-12, "θ={theta} m={m}");
            }
        }
        assert!((gas_success(1.0, 1) - 1.0).abs() < 1e-12);
        assert!((gas_success(1.0, 9) - 1.0).abs() < 1e-12);
        assert!((gas_success(0.25, 1) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn lumping_matches_full_chain() {
        for seed in 0..6 {
            let g = Graph::erdos_renyi_connected(7, 0.5, seed).unwrap();
            let p = g.cut_problem();
            let table = p.value_table().unwrap();
            let d = ValueDistribution::from_values(7, table.clone());
            let mut full = vec![1.0 / 128.0; 128];
            let mut lumped = ChainState::uniform(&d);
            for (s, l) in [1u64, 2, 4, 8].into_iter().enumerate() {
                if s % 2 == 0 {
                    full = full_chain_step(&table, &full, |lam| p_success(lam, 0.4038, l));
                    lumped = fpgs_transition(&d, &lumped, 0.4038, l);
                } else {
                    full = full_chain_step(&table, &full, |lam| gas_success(lam, l));
                    lumped = gas_transition(&d, &lumped, l);
                }
                let proj = project(&d, &table, &full);
                for (a, b) in proj.iter().zip(&lumped.prob) {
                    assert!((a - b).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn zero_rounds_report_uniform_statistics() {
        let (table, d) = toy();
        let r = benchmark(
            &d,
            &BenchmarkConfig {
                rounds: 0,
                ..Default::default()
            },
        )
        .unwrap();
        let mean = table.iter().sum::<f64>() / 8.0;
        let var = table.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 8.0;
        for m in [&r.fpgs, &r.gas] {
            assert_eq!(m.stats.len(), 1);
            assert!((m.stats[0].mean_pct - 100.0 * mean / 3.0).abs() < 1e-12);
            assert!((m.stats[0].std_pct - 100.0 * var.sqrt() / 3.0).abs() < 1e-12);
            assert!((m.stats[0].amplification - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn fpgs_beats_gas_on_seeded_graph() {
        let g = Graph::erdos_renyi_connected(12, 0.5, 7).unwrap();
        let d = g.cut_problem().distribution().unwrap();
        let r = benchmark(&d, &BenchmarkConfig::default()).unwrap();
        let (f, s) = (r.fpgs.stats.last().unwrap(), r.gas.stats.last().unwrap());
        assert!(f.mean_pct >= s.mean_pct);
        assert!(f.std_pct <= s.std_pct);
        assert!(f.amplification > s.amplification);
        assert_eq!(
            r.gas.stats.iter().map(|s| s.queries).collect::<Vec<_>>(),
            vec![0, 1, 2, 2, 2]
        );
        assert!(r.stats_csv().lines().count() == 11);
    }

    #[test]
    fn absorption_trivial_cases() {
        let (_, d) = toy();
        // ε = 1: every configuration is already in the top fraction
        let e = expected_queries_to_top_fraction_exact(&d, &ScheduleParams::default(), 1.0, 200).unwrap();
        assert_eq!(e, 0.0);
        let e = expected_queries_to_top_fraction_exact(&d, &ScheduleParams::default(), 0.25, 200).unwrap();
        assert!(e > 0.0 && e.is_finite());
    }

    proptest! {
        #[test]
        fn transitions_are_stochastic_and_monotone(
            table in proptest::collection::vec(-5i32..5, 16),
            init in proptest::collection::vec(0.0f64..1.0, 16),
            l in 1u64..50,
            delta in 0.1f64..0.9,
        ) {
            let d = ValueDistribution::from_values(4, table.iter().map(|&v| v as f64).collect());
            let k = d.num_classes();
            let total: f64 = init[..k].iter().sum::<f64>() + 1e-9;
            let prob: Vec<f64> = init[..k].iter().map(|p| (p + 1e-9 / k as f64) / total).collect();
            let state = ChainState { values: d.values.clone(), prob: prob.clone(), round: 0, schedule: vec![] };
            for next in [fpgs_transition(&d, &state, delta, l), gas_transition(&d, &state, l)] {
                next.validate(1e-12).unwrap();
                // mass at or above each class never decreases
                for c in 0..k {
                    let before: f64 = prob[c..].iter().sum();
                    let after: f64 = next.prob[c..].iter().sum();
                    prop_assert!(after >= before - 1e-12);
                }
            }
        }
    }
}
