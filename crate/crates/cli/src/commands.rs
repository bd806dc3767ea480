use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Parser;
use fpgas_core::circuit::{lower, qasm, reg, resources};
use fpgas_core::encoder::{build_encoder, build_marker, build_phase_block, build_u_qubo};
use fpgas_core::fpgs::build_fpgs_circuit;
use fpgas_core::markov::benchmark;
use fpgas_core::schedule::{
    fmt12, grid, optimize_known_lambda, optimize_known_lambda_limit, phase_portrait, tau_schedule_bound,
    tau_schedule_exact,
};
use fpgas_core::search::run_trials;
use fpgas_core::sim::success_probability;
use fpgas_core::{
    bits, BenchmarkConfig, Circuit, EncoderConfig, FpgsParams, Graph, ModelBackend, OracleBackend, QuboProblem,
    ScheduleParams, SearchOptions, SimBackend, StoppingCondition,
};
use serde::Serialize;
use serde_json::Value;

use crate::manifest::{commented, emit, json_document, read, RunManifest};
use crate::*;

pub fn run(cli: Cli, args: &[String]) -> Result<()> {
    match cli.command {
        Command::Encode(a) => encode(a, args),
        Command::Simulate(a) => simulate(a, args),
        Command::Optimize(a) => optimize(a, args),
        Command::Search(a) => search(a, args),
        Command::Benchmark(a) => run_benchmark(a, args),
        Command::Resources(a) => report_resources(a, args),
        Command::Graph(a) => graph(a, args),
        Command::Replay(a) => replay(a),
    }
}

fn load_problem(path: &Path, d: Option<u32>) -> Result<QuboProblem> {
    let p = QuboProblem::from_json(&read(path)?).with_context(|| format!("loading {}", path.display()))?;
    Ok(match d {
        Some(d) => p.with_width(d)?,
        None => p,
    })
}

fn encoder_config(opts: &EncoderOpts, marker: bool) -> EncoderConfig {
    let base = if marker {
        EncoderConfig::for_marker()
    } else {
        EncoderConfig::default()
    };
    EncoderConfig {
        eliminate_garbage_phases: opts.garbage_free,
        ..base.with_lambda(opts.lambda)
    }
}

fn build_circuit(opts: &EncoderOpts, build: &BuildOpts) -> Result<Circuit> {
    let problem = load_problem(&opts.qubo, opts.d)?;
    let plain = encoder_config(opts, false);
    let marker = encoder_config(opts, true);
    let threshold = || {
        build
            .threshold
            .context("--threshold is required for markers and FPGS circuits")
    };
    Ok(match build.kind {
        CircuitKind::Encoder => build_encoder(&problem, &plain)?,
        CircuitKind::UQubo => build_u_qubo(&problem, &plain)?,
        CircuitKind::PhaseBlock => build_phase_block(&problem, &plain)?,
        CircuitKind::Marker => build_marker(&problem, threshold()?, build.beta, &marker)?,
        CircuitKind::Fpgs => {
            build_fpgs_circuit(&problem, threshold()?, &FpgsParams::new(build.delta, build.l)?, &marker)?
        }
    })
}

/// Circuits keep full-precision angles so a stored circuit simulates exactly.
fn circuit_document(m: &RunManifest, circuit: &Circuit) -> Result<String> {
    let doc = serde_json::json!({ "manifest": m, "circuit": circuit });
    Ok(serde_json::to_string_pretty(&doc)? + "\n")
}

fn encode(a: EncodeArgs, args: &[String]) -> Result<()> {
    let m = RunManifest::new("encode", args, None);
    let circuit = build_circuit(&a.encoder, &a.build)?;
    let text = match a.emit {
        Emit::Json => circuit_document(&m, &circuit)?,
        Emit::Qasm => {
            let lowered = lower::lower_qft(&lower::lower_fanout(&circuit));
            commented(&m, "//", &qasm::to_qasm(&lowered)?)
        }
    };
    if a.report {
        emit(None, &json_document(&m, "report", resources(&circuit))?)?;
        if let Some(out) = &a.out {
            emit(Some(out), &text)?;
        }
        Ok(())
    } else {
        emit(a.out.as_deref(), &text)
    }
}

fn load_circuit(path: &Path) -> Result<Circuit> {
    let v: Value = serde_json::from_str(&read(path)?).with_context(|| format!("parsing {}", path.display()))?;
    let body = v.get("circuit").unwrap_or(&v);
    Ok(Circuit::from_json(&body.to_string())?)
}

fn parse_marked(text: &str, n: usize) -> Result<Vec<u64>> {
    let entry = |v: &Value| -> Result<u64> {
        match v {
            Value::String(s) => Ok(bits::parse_index(s, n)?),
            Value::Number(k) => k.as_u64().context("marked index must be a non-negative integer"),
            other => bail!("unexpected marked entry {other}"),
        }
    };
    if text.trim_start().starts_with('[') || text.trim_start().starts_with('{') {
        let v: Value = serde_json::from_str(text)?;
        let list = v.get("marked").unwrap_or(&v);
        let Value::Array(items) = list else {
            bail!("marked set must be a JSON array");
        };
        return items.iter().map(entry).collect();
    }
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| Ok(bits::parse_index(l, n)?))
        .collect()
}

fn simulate(a: SimulateArgs, args: &[String]) -> Result<()> {
    let m = RunManifest::new("simulate", args, None);
    let circuit = load_circuit(&a.circuit)?;
    let n = circuit.qubits_of(reg::INPUT).len();
    let marked = parse_marked(&read(&a.marked)?, n)?;
    let report = success_probability(&circuit, &marked)?;
    let text = if a.report_json {
        json_document(&m, "report", report)?
    } else {
        let body = format!(
            "probability {}\nleakage {}\n",
            fmt12(report.probability),
            fmt12(report.leakage)
        );
        commented(&m, "#", &body)
    };
    emit(a.out.as_deref(), &text)
}

fn parse_range(s: &str, with_step: bool) -> Result<Vec<f64>> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .with_context(|| format!("malformed range {s:?}"))?;
    match (parts.as_slice(), with_step) {
        (&[lo, hi], false) if lo < hi => Ok(vec![lo, hi]),
        (&[lo, hi, step], true) if lo <= hi && step > 0.0 => Ok(grid(lo, hi, step)),
        _ if with_step => bail!("expected lo:hi:step with lo <= hi and step > 0, got {s:?}"),
        _ => bail!("expected lo:hi with lo < hi, got {s:?}"),
    }
}

#[derive(Serialize)]
struct ScheduleReport {
    #[serde(flatten)]
    bound: fpgas_core::ScheduleBound,
    /// The series summed without the tail bound.
    exact: f64,
}

fn optimize(a: OptimizeArgs, args: &[String]) -> Result<()> {
    let m = RunManifest::new("optimize", args, None);
    let lambda = a.lambda.unwrap_or(match a.mode {
        OptimizeMode::KnownLambda => 2f64.powi(-20),
        _ => 2f64.powi(-40),
    });
    let delta_bounds = || -> Result<(f64, f64)> {
        let r = a.delta_range.as_deref().map(|s| parse_range(s, false)).transpose()?;
        Ok(r.map_or((0.3, 0.9), |r| (r[0], r[1])))
    };
    let csv = |header: &str, row: Vec<f64>| {
        let row: Vec<String> = row.into_iter().map(fmt12).collect();
        format!("{header}\n{}\n", row.join(","))
    };
    let (json, table) = match a.mode {
        OptimizeMode::KnownLambda | OptimizeMode::KnownLambdaLimit => {
            let (lo, hi) = delta_bounds()?;
            let opt = if a.mode == OptimizeMode::KnownLambda {
                optimize_known_lambda(lambda, lo, hi)?
            } else {
                optimize_known_lambda_limit(lo, hi)?
            };
            let lambda = (a.mode == OptimizeMode::KnownLambda).then_some(lambda);
            let doc = serde_json::json!({ "lambda": lambda, "delta": opt.delta, "tau": opt.tau });
            let table = csv("lambda,delta,tau", vec![lambda.unwrap_or(0.0), opt.delta, opt.tau]);
            (json_document(&m, "optimum", doc)?, table)
        }
        OptimizeMode::Schedule => {
            let params = ScheduleParams::new(a.delta, a.alpha)?;
            let bound = tau_schedule_bound(&params, lambda)?;
            let exact = tau_schedule_exact(&params, lambda)?;
            let table = csv(
                "lambda,delta,alpha,l_crit,s0,head,tail,bound,exact",
                vec![
                    lambda,
                    a.delta,
                    a.alpha,
                    bound.l_crit as f64,
                    bound.s0 as f64,
                    bound.head,
                    bound.tail,
                    bound.bound,
                    exact,
                ],
            );
            (json_document(&m, "schedule", ScheduleReport { bound, exact })?, table)
        }
        OptimizeMode::Portrait => {
            let deltas = parse_range(a.delta_range.as_deref().unwrap_or("0.3:0.5:0.01"), true)?;
            let alphas = parse_range(a.alpha_range.as_deref().unwrap_or("1.5:2.5:0.025"), true)?;
            let p = phase_portrait(&deltas, &alphas, lambda)?;
            let table = p.to_csv();
            let min = p.minimum();
            (
                json_document(
                    &m,
                    "portrait",
                    serde_json::json!({ "lambda": lambda, "minimum": min, "cells": p.cells }),
                )?,
                table,
            )
        }
    };
    match &a.out {
        Some(out) => emit(Some(out), &commented(&m, "#", &table)),
        None if a.mode == OptimizeMode::Portrait => emit(None, &commented(&m, "#", &table)),
        None => emit(None, &json),
    }
}

#[derive(Serialize)]
struct TrialSummary {
    trial: u64,
    seed: u64,
    best_x: u64,
    best_bits: String,
    best_value: f64,
    queries: u64,
    rounds: u64,
}

#[derive(Serialize)]
struct SearchSummary {
    trials: u64,
    mean_best_value: f64,
    mean_queries: f64,
    /// Fraction of trials that met `--target`.
    target_rate: Option<f64>,
}

fn search(a: SearchArgs, args: &[String]) -> Result<()> {
    let m = RunManifest::new("search", args, Some(a.seed));
    if a.trials == 0 {
        bail!("--trials must be at least 1");
    }
    let problem = load_problem(&a.qubo, None)?;
    let stop = StoppingCondition::new(a.max_queries, a.max_rounds, a.target)?;
    let options = SearchOptions {
        params: ScheduleParams::new(a.delta, a.alpha)?,
        reset_on_success: a.reset_on_success,
        warm_start: a.warm_start,
    };
    let backend: Box<dyn OracleBackend> = match a.backend {
        Backend::Model => Box::new(ModelBackend::new(&problem, a.delta)?),
        Backend::Sim => Box::new(SimBackend::new(
            &problem,
            a.delta,
            EncoderConfig::for_marker().with_lambda(a.lambda),
        )?),
    };
    let outcomes = run_trials(backend.as_ref(), &stop, &options, a.seed, a.trials)?;
    let n = problem.n();
    let trials: Vec<TrialSummary> = outcomes
        .iter()
        .enumerate()
        .map(|(i, o)| TrialSummary {
            trial: i as u64,
            seed: o.state.seed,
            best_x: o.state.best_x,
            best_bits: bits::format(o.state.best_x, n),
            best_value: o.state.best_value,
            queries: o.state.t_elapsed,
            rounds: o.state.rounds,
        })
        .collect();
    let count = a.trials as f64;
    let summary = SearchSummary {
        trials: a.trials,
        mean_best_value: trials.iter().map(|t| t.best_value).sum::<f64>() / count,
        mean_queries: trials.iter().map(|t| t.queries as f64).sum::<f64>() / count,
        target_rate: a
            .target
            .map(|t| trials.iter().filter(|r| r.best_value >= t).count() as f64 / count),
    };
    let doc = serde_json::json!({
        "backend": backend.name(),
        "n": n,
        "options": options,
        "stop": stop,
        "summary": summary,
        "trials": trials,
        "traces": outcomes,
    });
    emit(a.out.as_deref(), &json_document(&m, "search", doc)?)
}

fn run_benchmark(a: BenchmarkArgs, args: &[String]) -> Result<()> {
    let m = RunManifest::new("benchmark", args, Some(a.seed));
    let problem = match (&a.graph, &a.qubo) {
        (Some(g), _) => Graph::parse_edge_list(&read(g)?, None)?.cut_problem(),
        (None, Some(q)) => load_problem(q, None)?,
        (None, None) => unreachable!("clap requires one input"),
    };
    let config = BenchmarkConfig {
        rounds: a.rounds,
        params: ScheduleParams::new(a.delta, a.alpha)?,
        gas_growth: a.gas_growth,
    };
    let report = benchmark(&problem.distribution()?, &config)?;
    if let Some(path) = &a.distributions {
        emit(Some(path), &commented(&m, "#", &report.distributions_csv()))?;
    }
    emit(a.out.as_deref(), &commented(&m, "#", &report.stats_csv()))
}

fn report_resources(a: ResourcesArgs, args: &[String]) -> Result<()> {
    let m = RunManifest::new("resources", args, None);
    let circuit = match (&a.circuit, &a.qubo) {
        (Some(path), _) => load_circuit(path)?,
        (None, Some(q)) => {
            let opts = EncoderOpts {
                qubo: q.clone(),
                d: a.d,
                lambda: a.lambda,
                garbage_free: a.garbage_free,
            };
            build_circuit(&opts, &a.build)?
        }
        (None, None) => unreachable!("clap requires one input"),
    };
    emit(a.out.as_deref(), &json_document(&m, "report", resources(&circuit))?)
}

fn graph(a: GraphArgs, args: &[String]) -> Result<()> {
    let m = RunManifest::new("graph", args, Some(a.seed));
    let g = Graph::erdos_renyi_connected(a.n, a.p, a.seed)?;
    emit(a.out.as_deref(), &commented(&m, "#", &g.to_edge_list()))
}

fn replay(a: ReplayArgs) -> Result<()> {
    let manifest = RunManifest::extract(&read(&a.file)?)?;
    if manifest.subcommand == "replay" {
        bail!("refusing to replay a replay");
    }
    let out = a.out.as_ref().map(|p| p.to_string_lossy().into_owned());
    let args = manifest.replay_args(out.as_deref());
    let cli = Cli::try_parse_from(std::iter::once("fpgas".to_string()).chain(args))?;
    // record the original command so the rerun differs only in its timestamp
    run(cli, &manifest.args)
}
