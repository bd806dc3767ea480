//! Fixed-point Grover adaptive search: raise the threshold whenever a better
//! configuration is measured, growing the query budget geometrically.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::circuit::reg;
use crate::encoder::EncoderConfig;
use crate::error::{Error, Result};
use crate::fpgs::{build_fpgs_circuit, p_success, FpgsParams};
use crate::markov::expected_queries_to_top_fraction_exact;
use crate::qubo::{QuboProblem, ValueDistribution, ValueMode};
use crate::schedule::{round_queries, ScheduleParams};
use crate::sim::{input_marginal, simulate};

/// When to stop the loop. Checked after every round (and once before the first).
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct StoppingCondition {
    pub max_queries: Option<u64>,
    pub max_rounds: Option<u64>,
    pub target_value: Option<f64>,
}

impl StoppingCondition {
    pub fn new(max_queries: Option<u64>, max_rounds: Option<u64>, target_value: Option<f64>) -> Result<Self> {
        if max_queries.is_none() && max_rounds.is_none() {
            // a target alone may never be met if it exceeds max f
            return Err(Error::Parameter("set a query or round limit".into()));
        }
        Ok(StoppingCondition {
            max_queries,
            max_rounds,
            target_value,
        })
    }

    pub fn rounds(r: u64) -> Self {
        StoppingCondition {
            max_rounds: Some(r),
            ..Default::default()
        }
    }

    pub fn reached(&self, queries: u64, rounds: u64, best: f64) -> bool {
        self.max_queries.is_some_and(|m| queries >= m)
            || self.max_rounds.is_some_and(|m| rounds >= m)
            || self.target_value.is_some_and(|t| best >= t)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct SearchOptions {
    pub params: ScheduleParams,
    /// Restart the budget at one query after every improvement.
    pub reset_on_success: bool,
    /// Spend `⌈log₂(n)²⌉` free uniform samples before the first FPGS round.
    pub warm_start: bool,
}

/// Produces one measurement of `G(th, l)|0⟩`.
pub trait OracleBackend: Sync {
    fn name(&self) -> &'static str;
    fn num_vars(&self) -> usize;
    fn value(&self, x: u64) -> f64;
    fn sample(&self, threshold: f64, l: u64, rng: &mut dyn RngCore) -> Result<u64>;
}

/// Samples the exact FPGS output law: success with `ℙ_success(λ(th), δ, l)`,
/// then uniform over `{f > th}`; failure is uniform over `{f ≤ th}`. Amplitude
/// amplification keeps both subspaces uniform, so this matches the circuit.
pub struct ModelBackend {
    n: usize,
    delta: f64,
    table: Vec<f64>,
    /// Configurations sorted by value.
    order: Vec<u32>,
    sorted: Vec<f64>,
}

impl ModelBackend {
    pub fn new(problem: &QuboProblem, delta: f64) -> Result<Self> {
        FpgsParams::new(delta, 0)?;
        let table = problem.value_table()?;
        let mut order: Vec<u32> = (0..table.len() as u32).collect();
        order.sort_by(|&a, &b| table[a as usize].total_cmp(&table[b as usize]).then(a.cmp(&b)));
        let sorted = order.iter().map(|&i| table[i as usize]).collect();
        Ok(ModelBackend {
            n: problem.n(),
            delta,
            table,
            order,
            sorted,
        })
    }

    pub fn distribution(&self) -> ValueDistribution {
        ValueDistribution::from_values(self.n, self.table.clone())
    }
}

impl OracleBackend for ModelBackend {
    fn name(&self) -> &'static str {
        "model"
    }

    fn num_vars(&self) -> usize {
        self.n
    }

    fn value(&self, x: u64) -> f64 {
        self.table[x as usize]
    }

    fn sample(&self, threshold: f64, l: u64, rng: &mut dyn RngCore) -> Result<u64> {
        let below = self.sorted.partition_point(|&v| v <= threshold);
        let total = self.sorted.len();
        let marked = total - below;
        let lambda = marked as f64 / total as f64;
        let hit = below == 0 || (marked > 0 && rng.gen::<f64>() < p_success(lambda, self.delta, l));
        let i = if hit {
            below + rng.gen_range(0..marked)
        } else {
            rng.gen_range(0..below)
        };
        Ok(self.order[i] as u64)
    }
}

/// Builds and simulates the FPGS circuit, then samples the `x` register.
/// Output distributions are cached per `(threshold, l)`.
pub struct SimBackend {
    problem: QuboProblem,
    delta: f64,
    config: EncoderConfig,
    cache: Mutex<HashMap<(u64, u64), Arc<OutputLaw>>>,
}

/// Measurement distribution of the `x` register after one FPGS run.
#[derive(Clone, Debug)]
pub struct OutputLaw {
    pub marginal: Vec<f64>,
    index: WeightedIndex<f64>,
}

impl SimBackend {
    /// Widens the value register so every `threshold − f(x)` fits.
    pub fn new(problem: &QuboProblem, delta: f64, config: EncoderConfig) -> Result<Self> {
        FpgsParams::new(delta, 0)?;
        if problem.mode() != ValueMode::Integer {
            return Err(Error::Parameter(
                "the simulated marker needs an integer-valued QUBO".into(),
            ));
        }
        let (lo, hi) = problem.value_bounds();
        let span = hi - lo;
        let mut width = problem.width();
        while span >= 2f64.powi(width as i32 - 1) {
            width += 1;
        }
        let problem = problem.with_width(width)?;
        Ok(SimBackend {
            problem,
            delta,
            config,
            cache: Mutex::new(HashMap::new()),
        })
    }

    pub fn output_distribution(&self, threshold: f64, l: u64) -> Result<Arc<OutputLaw>> {
        let key = (threshold.to_bits(), l);
        if let Some(w) = self.cache.lock().expect("cache lock").get(&key) {
            return Ok(w.clone());
        }
        let params = FpgsParams::new(self.delta, l)?;
        let circuit = build_fpgs_circuit(&self.problem, threshold, &params, &self.config)?;
        debug_assert_eq!(circuit.qubits_of(reg::INPUT).len(), self.problem.n());
        let state = simulate(&circuit)?;
        let (marginal, leakage) = input_marginal(&circuit, state.as_ref());
        if leakage > 1e-6 {
            return Err(Error::Invariant(format!("work registers leaked {leakage}")));
        }
        let index = WeightedIndex::new(&marginal).map_err(|e| Error::Invariant(e.to_string()))?;
        let w = Arc::new(OutputLaw { marginal, index });
        self.cache.lock().expect("cache lock").insert(key, w.clone());
        Ok(w)
    }
}

impl OracleBackend for SimBackend {
    fn name(&self) -> &'static str {
        "sim"
    }

    fn num_vars(&self) -> usize {
        self.problem.n()
    }

    fn value(&self, x: u64) -> f64 {
        self.problem.value_at(x)
    }

    fn sample(&self, threshold: f64, l: u64, rng: &mut dyn RngCore) -> Result<u64> {
        let w = self.output_distribution(threshold, l)?;
        Ok(w.index.sample(rng) as u64)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchState {
    pub best_x: u64,
    pub best_value: f64,
    /// Current budget `ℓ`, kept real and ceiled at use.
    pub l: f64,
    pub t_elapsed: u64,
    pub rounds: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RoundRecord {
    pub round: u64,
    /// Free uniform sample from the warm start.
    pub warm: bool,
    pub queries: u64,
    pub sample: u64,
    pub value: f64,
    pub accepted: bool,
    pub best_value: f64,
    pub t_elapsed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SearchOutcome {
    pub initial_x: u64,
    pub initial_value: f64,
    pub state: SearchState,
    pub trace: Vec<RoundRecord>,
}

/// Runs the adaptive loop: start from a random `x`, and in each round measure
/// `G(th, ⌈ℓ⌉)|0⟩`, add `⌈ℓ⌉` to `t`, accept the sample if it beats `th`, then
/// multiply `ℓ` by `α`.
pub fn run_fpgas(
    backend: &dyn OracleBackend,
    stop: &StoppingCondition,
    options: &SearchOptions,
    seed: u64,
) -> Result<SearchOutcome> {
    let n = backend.num_vars();
    if n == 0 || n > 63 {
        return Err(Error::Parameter(format!("cannot search over {n} variables")));
    }
    let alpha = options.params.alpha;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let space = 1u64 << n;
    let initial_x = rng.gen_range(0..space);
    let initial_value = backend.value(initial_x);
    let (mut best_x, mut best) = (initial_x, initial_value);
    let mut trace = Vec::new();
    let (mut t, mut rounds) = (0u64, 0u64);

    if options.warm_start {
        let warm = ((n as f64).log2().powi(2)).ceil() as u64;
        for _ in 0..warm {
            let y = rng.gen_range(0..space);
            let v = backend.value(y);
            let accepted = v > best;
            if accepted {
                best_x = y;
                best = v;
            }
            trace.push(RoundRecord {
                round: 0,
                warm: true,
                queries: 0,
                sample: y,
                value: v,
                accepted,
                best_value: best,
                t_elapsed: t,
            });
        }
    }

    // ℓ = α^k
    let mut k = 0u32;
    while !stop.reached(t, rounds, best) {
        let q = round_queries(alpha, k + 1);
        let y = backend.sample(best, q, &mut rng)?;
        let v = backend.value(y);
        t += q;
        rounds += 1;
        let accepted = v > best;
        if accepted {
            best_x = y;
            best = v;
        }
        k = if accepted && options.reset_on_success { 0 } else { k + 1 };
        trace.push(RoundRecord {
            round: rounds,
            warm: false,
            queries: q,
            sample: y,
            value: v,
            accepted,
            best_value: best,
            t_elapsed: t,
        });
    }
    Ok(SearchOutcome {
        initial_x,
        initial_value,
        state: SearchState {
            best_x,
            best_value: best,
            l: alpha.powi(k as i32),
            t_elapsed: t,
            rounds,
            seed,
        },
        trace,
    })
}

/// Seed of trial `i`, derived from the base seed by stream splitting.
pub fn trial_seed(seed: u64, trial: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial);
    rng.next_u64()
}

/// Independent trials in parallel; results are in trial order.
pub fn run_trials(
    backend: &dyn OracleBackend,
    stop: &StoppingCondition,
    options: &SearchOptions,
    seed: u64,
    trials: u64,
) -> Result<Vec<SearchOutcome>> {
    (0..trials)
        .into_par_iter()
        .map(|i| run_fpgas(backend, stop, options, trial_seed(seed, i)))
        .collect()
}

/// `g₀` from the top-fraction heuristic.
pub const G0: f64 = 1.433;

/// `𝔼[l_total,ε] ≈ g₀(1/√ε − 1)` queries to reach the top `ε` fraction.
pub fn expected_queries_to_top_fraction(epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::Parameter(format!("epsilon must lie in (0, 1], got {epsilon}")));
    }
    Ok(G0 * (1.0 / epsilon.sqrt() - 1.0))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TopFractionEstimate {
    pub epsilon: f64,
    pub heuristic: f64,
    /// Exact expectation from the lumped chain under the same schedule.
    pub exact: f64,
}

pub fn compare_top_fraction(
    dist: &ValueDistribution,
    params: &ScheduleParams,
    epsilon: f64,
) -> Result<TopFractionEstimate> {
    Ok(TopFractionEstimate {
        epsilon,
        heuristic: expected_queries_to_top_fraction(epsilon)?,
        exact: expected_queries_to_top_fraction_exact(dist, params, epsilon, 10_000)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qubo::appendix_problem;

    fn one_bit() -> QuboProblem {
        QuboProblem::new(vec![vec![3.0]], 1.0, None, ValueMode::Integer).unwrap()
    }

    #[test]
    fn one_variable_reaches_max() {
        let p = one_bit();
        let b = ModelBackend::new(&p, 0.4038).unwrap();
        let stop = StoppingCondition::new(None, Some(50), Some(4.0)).unwrap();
        for seed in 0..20 {
            let out = run_fpgas(&b, &stop, &SearchOptions::default(), seed).unwrap();
            assert_eq!(out.state.best_value, 4.0);
            assert_eq!(out.state.best_x, 1);
        }
    }

    #[test]
    fn stopping_needs_a_limit() {
        assert!(StoppingCondition::new(None, None, Some(1.0)).is_err());
        assert!(StoppingCondition::new(Some(10), None, None).is_ok());
    }

    #[test]
    fn query_accounting_and_monotone_threshold() {
        let p = appendix_problem();
        let b = ModelBackend::new(&p, 0.4038).unwrap();
        let stop = StoppingCondition::rounds(12);
        for seed in 0..50 {
            let out = run_fpgas(&b, &stop, &SearchOptions::default(), seed).unwrap();
            let want: u64 = (1..=12).map(|s| round_queries(1.975, s)).sum();
            assert_eq!(out.state.t_elapsed, want);
            let mut best = out.initial_value;
            for r in &out.trace {
                if r.accepted {
                    assert!(r.value > best);
                    best = r.value;
                }
                assert_eq!(r.best_value, best);
            }
            assert_eq!(p.value_at(out.state.best_x), out.state.best_value);
        }
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let p = appendix_problem();
        let b = ModelBackend::new(&p, 0.4038).unwrap();
        let stop = StoppingCondition::new(Some(200), None, None).unwrap();
        let opts = SearchOptions {
            warm_start: true,
            ..Default::default()
        };
        let a = run_trials(&b, &stop, &opts, 99, 16).unwrap();
        let c = run_trials(&b, &stop, &opts, 99, 16).unwrap();
        assert_eq!(a, c);
        assert_ne!(a[0].trace, a[1].trace);
        assert!(a[0].trace.iter().filter(|r| r.warm).count() == 6);
    }

    #[test]
    fn reset_restarts_budget() {
        let p = appendix_problem();
        let b = ModelBackend::new(&p, 0.4038).unwrap();
        let opts = SearchOptions {
            reset_on_success: true,
            ..Default::default()
        };
        let out = run_fpgas(&b, &StoppingCondition::rounds(30), &opts, 5).unwrap();
        let mut k = 0;
        for r in &out.trace {
            assert_eq!(r.queries, round_queries(1.975, k + 1));
            k = if r.accepted { 0 } else { k + 1 };
        }
        assert!(out.trace.iter().any(|r| r.accepted));
    }

    #[test]
    fn model_beats_random_guessing_on_appendix() {
        let p = appendix_problem();
        let b = ModelBackend::new(&p, 0.4038).unwrap();
        let out = run_trials(&b, &StoppingCondition::rounds(12), &SearchOptions::default(), 3, 10_000).unwrap();
        let hit = out.iter().filter(|o| o.state.best_value == 5.0).count() as f64 / 1e4;
        // 13 uniform guesses: 1 − (29/32)^13
        let baseline = 1.0 - (29.0f64 / 32.0).powi(13);
        assert!(hit > baseline, "{hit} vs {baseline}");
    }

    #[test]
    fn sim_backend_matches_model_law() {
        let p = appendix_problem();
        let sim = SimBackend::new(&p, 0.4038, EncoderConfig::for_marker()).unwrap();
        let dist = p.distribution().unwrap();
        for (th, l) in [(4.0, 1), (4.0, 3), (2.0, 2), (0.0, 1)] {
            let law = sim.output_distribution(th, l).unwrap();
            let want = p_success(dist.lambda(th), 0.4038, l);
            let marked: Vec<f64> = (0..32u64)
                .filter(|&x| p.value_at(x) > th)
                .map(|x| law.marginal[x as usize])
                .collect();
            let unmarked: Vec<f64> = (0..32u64)
                .filter(|&x| p.value_at(x) <= th)
                .map(|x| law.marginal[x as usize])
                .collect();
            assert!((marked.iter().sum::<f64>() - want).abs() < 1e-9, "th={th} l={l}");
            // uniform within each subspace
            for m in &marked {
                assert!((m - want / marked.len() as f64).abs() < 1e-9);
            }
            for u in &unmarked {
                assert!((u - (1.0 - want) / unmarked.len() as f64).abs() < 1e-9);
            }
        }
        let out = run_fpgas(&sim, &StoppingCondition::rounds(4), &SearchOptions::default(), 11).unwrap();
        assert_eq!(out.state.rounds, 4);
    }

    #[test]
    fn top_fraction_heuristic() {
        assert_eq!(expected_queries_to_top_fraction(1.0).unwrap(), 0.0);
        assert_eq!(expected_queries_to_top_fraction(0.25).unwrap(), 1.433);
        assert!(expected_queries_to_top_fraction(0.0).is_err());
    }
}
