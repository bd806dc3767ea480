//! End-to-end checks that cross module boundaries.

use fpgas_core::circuit::reg;
use fpgas_core::encoder::build_encoder;
use fpgas_core::markov::benchmark;
use fpgas_core::qubo::appendix_problem;
use fpgas_core::search::run_fpgas;
use fpgas_core::sim::{embed_register, register_value, simulate_from};
use fpgas_core::{
    BenchmarkConfig, EncoderConfig, Graph, QuboProblem, SearchOptions, SimBackend, StoppingCondition, ValueMode,
};

fn brute(q: &[[i64; 2]; 2], offset: i64, x: u64) -> i64 {
    let b = [(x >> 1) & 1, x & 1].map(|v| v as i64);
    offset
        + (0..2)
            .flat_map(|j| (0..2).map(move |k| q[j][k] * b[j] * b[k]))
            .sum::<i64>()
}

/// `|x, 0⟩ ↦ e^{iφ}|x, f(x) mod 2^d⟩`, including values far outside the signed range.
#[test]
fn modular_encoder_wraps_values() {
    let q = [[7, 5], [5, -6]];
    let rows = q.iter().map(|r| r.iter().map(|&v| v as f64).collect()).collect();
    let d = 3;
    let problem = QuboProblem::new(rows, 3.0, Some(8), ValueMode::Integer)
        .unwrap()
        .with_modular_width(d)
        .unwrap();
    for lambda in [1, 2] {
        let c = build_encoder(&problem, &EncoderConfig::default().with_lambda(lambda)).unwrap();
        let (x, y, nq) = (c.qubits_of(reg::INPUT), c.qubits_of(reg::VALUE), c.num_qubits());
        for input in 0..4u64 {
            let state = simulate_from(&c, embed_register(input, nq, &x)).unwrap();
            let big: Vec<_> = state
                .nonzero()
                .into_iter()
                .filter(|(_, a)| a.norm_sqr() > 1e-12)
                .collect();
            assert_eq!(big.len(), 1, "x = {input}");
            let (idx, amp) = big[0];
            assert!((amp.norm() - 1.0).abs() < 1e-9);
            assert_eq!(register_value(idx, nq, &x), input);
            let want = brute(&q, 3, input).rem_euclid(1 << d) as u64;
            assert_eq!(register_value(idx, nq, &y), want, "x = {input}, lambda = {lambda}");
            assert_eq!(
                idx & !(embed_register(u64::MAX >> 61, nq, &y) | embed_register(3, nq, &x)),
                0
            );
        }
    }
}

/// The lumped chain predicts the law of the best value after each round of the
/// simulated-circuit search.
#[test]
fn search_with_simulated_circuits_follows_the_chain() {
    let g = Graph::new(4, vec![(0, 1), (1, 2), (2, 3), (0, 2)]).unwrap();
    let problem = g.cut_problem();
    let dist = problem.distribution().unwrap();
    let rounds = 3;
    let config = BenchmarkConfig {
        rounds,
        ..Default::default()
    };
    let chain = benchmark(&dist, &config).unwrap();
    let want = &chain.fpgs.distributions[rounds as usize];

    let backend = SimBackend::new(&problem, config.params.delta, EncoderConfig::for_marker()).unwrap();
    let options = SearchOptions {
        params: config.params,
        ..Default::default()
    };
    let trials = 20_000;
    let mut counts = vec![0u64; dist.values.len()];
    for seed in 0..trials {
        let out = run_fpgas(&backend, &StoppingCondition::rounds(rounds as u64), &options, seed).unwrap();
        counts[dist.class_of(out.state.best_value).unwrap()] += 1;
    }
    for (class, (c, &p)) in counts.iter().zip(want).enumerate() {
        let got = *c as f64 / trials as f64;
        let sigma = (p * (1.0 - p) / trials as f64).sqrt().max(1e-4);
        assert!((got - p).abs() < 5.0 * sigma, "class {class}: {got} vs {p}");
    }
}

#[test]
fn simulated_search_finds_the_appendix_maximum() {
    let problem = appendix_problem();
    let backend = SimBackend::new(&problem, 0.4038, EncoderConfig::for_marker()).unwrap();
    let stop = StoppingCondition::new(Some(500), None, Some(5.0)).unwrap();
    for seed in 0..20 {
        let out = run_fpgas(&backend, &stop, &SearchOptions::default(), seed).unwrap();
        assert_eq!(out.state.best_value, 5.0, "seed {seed}");
        assert_eq!(problem.value_at(out.state.best_x), 5.0);
        let monotone = out.trace.windows(2).all(|w| w[0].best_value <= w[1].best_value);
        assert!(monotone);
    }
}

#[test]
fn cut_encoder_writes_cut_sizes() {
    let g = Graph::erdos_renyi_connected(4, 0.6, 1).unwrap();
    let problem = g.cut_problem();
    let c = build_encoder(&problem, &EncoderConfig::default()).unwrap();
    let (x, y, nq) = (c.qubits_of(reg::INPUT), c.qubits_of(reg::VALUE), c.num_qubits());
    let d = y.len() as u32;
    for input in 0..16u64 {
        let cut = g
            .edges()
            .iter()
            .filter(|&&(u, v)| ((input >> (3 - u)) ^ (input >> (3 - v))) & 1 == 1)
            .count() as u64;
        let state = simulate_from(&c, embed_register(input, nq, &x)).unwrap();
        let (idx, _) = state
            .nonzero()
            .into_iter()
            .max_by(|a, b| a.1.norm_sqr().total_cmp(&b.1.norm_sqr()))
            .unwrap();
        assert_eq!(register_value(idx, nq, &y), cut % (1 << d), "x = {input:04b}");
    }
}
