use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpgas_bench::er_cut;
use fpgas_core::encoder::build_encoder;
use fpgas_core::fpgs::{build_fpgs_circuit, p_success};
use fpgas_core::markov::benchmark;
use fpgas_core::qubo::appendix_problem;
use fpgas_core::schedule::{grid, optimize_known_lambda, phase_portrait, tau_schedule_bound};
use fpgas_core::sim::simulate;
use fpgas_core::{BenchmarkConfig, EncoderConfig, FpgsParams, ScheduleParams};

fn closed_form(c: &mut Criterion) {
    c.bench_function("p_success 2^-40", |b| {
        b.iter(|| p_success(black_box(2f64.powi(-40)), black_box(0.4038), black_box(816_040)))
    });
}

fn schedule(c: &mut Criterion) {
    let params = ScheduleParams::default();
    c.bench_function("tau_schedule_bound 2^-40", |b| {
        b.iter(|| tau_schedule_bound(&params, black_box(2f64.powi(-40))).unwrap())
    });
    let mut group = c.benchmark_group("optimize");
    group.sample_size(10);
    group.bench_function("known lambda 2^-20", |b| {
        b.iter(|| optimize_known_lambda(black_box(2f64.powi(-20)), 0.3, 0.9).unwrap())
    });
    let deltas = grid(0.3, 0.5, 0.01);
    let alphas = grid(1.5, 2.5, 0.05);
    group.bench_function("portrait 21x21", |b| {
        b.iter(|| phase_portrait(&deltas, &alphas, black_box(2f64.powi(-40))).unwrap())
    });
    group.finish();
}

fn circuits(c: &mut Criterion) {
    let problem = appendix_problem();
    let m = problem.rewrite().m;
    let mut group = c.benchmark_group("encoder");
    for lambda in [1, 2, m] {
        let config = EncoderConfig::default().with_lambda(lambda);
        group.bench_with_input(BenchmarkId::new("build", lambda), &config, |b, config| {
            b.iter(|| build_encoder(&problem, config).unwrap())
        });
    }
    group.finish();

    let params = FpgsParams::new(0.5, 3).unwrap();
    let circuit = build_fpgs_circuit(&problem, 3.0, &params, &EncoderConfig::for_marker()).unwrap();
    c.bench_function("simulate fpgs appendix l=3", |b| b.iter(|| simulate(&circuit).unwrap()));
}

fn markov(c: &mut Criterion) {
    let mut group = c.benchmark_group("markov");
    for n in [12, 16] {
        let dist = er_cut(n, 7).distribution().unwrap();
        group.bench_with_input(BenchmarkId::new("benchmark 4 rounds", n), &dist, |b, dist| {
            b.iter(|| benchmark(dist, &BenchmarkConfig::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, closed_form, schedule, circuits, markov);
criterion_main!(benches);
