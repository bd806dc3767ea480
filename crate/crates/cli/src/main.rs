use std::path::PathBuf;
use std::process::ExitCode;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};

mod commands;
mod manifest;

/// Compile QUBOs into dictionary-encoder circuits, tune fixed-point Grover
/// schedules, and run adaptive searches and their exact benchmarks.
#[derive(Debug, Parser)]
#[command(name = "fpgas", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build an encoder, marker or FPGS circuit for a QUBO.
    Encode(EncodeArgs),
    /// Simulate a circuit and report the probability of a marked set.
    Simulate(SimulateArgs),
    /// Optimise FPGS and schedule parameters.
    Optimize(OptimizeArgs),
    /// Run the adaptive search on a QUBO.
    Search(SearchArgs),
    /// Exact Markov-chain benchmark of FPGS against Grover adaptive search.
    Benchmark(BenchmarkArgs),
    /// Resource report for a generated or stored circuit.
    Resources(ResourcesArgs),
    /// Generate a connected Erdős–Rényi graph.
    Graph(GraphArgs),
    /// Rerun the command recorded in an output file's manifest.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Emit {
    Json,
    Qasm,
}

/// Options shared by everything that builds encoder circuits.
#[derive(Debug, Args)]
pub struct EncoderOpts {
    /// QUBO description (JSON).
    #[arg(long)]
    pub qubo: PathBuf,
    /// Value-register width; overrides the file's `d`.
    #[arg(long)]
    pub d: Option<u32>,
    /// Terms phased in parallel (1 = ancilla-free).
    #[arg(long, default_value_t = 1)]
    pub lambda: usize,
    /// Cancel the x-dependent garbage phase.
    #[arg(long)]
    pub garbage_free: bool,
}

#[derive(Debug, Args)]
pub struct EncodeArgs {
    #[command(flatten)]
    pub encoder: EncoderOpts,
    #[command(flatten)]
    pub build: BuildOpts,
    #[arg(long, value_enum, default_value_t = Emit::Json)]
    pub emit: Emit,
    /// Print the resource report on stdout.
    #[arg(long)]
    pub report: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Circuit JSON as written by `encode --emit json`.
    #[arg(long)]
    pub circuit: PathBuf,
    /// Marked configurations: a JSON array of indices or bitstrings, or one bitstring per line.
    #[arg(long)]
    pub marked: PathBuf,
    /// Print the report as JSON instead of text.
    #[arg(long)]
    pub report_json: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OptimizeMode {
    /// Best δ for FPGS with known λ.
    KnownLambda,
    /// Best δ as λ → 0.
    KnownLambdaLimit,
    /// Expected-query bound of the geometric schedule at (δ, α).
    Schedule,
    /// The schedule bound over a (δ, α) grid.
    Portrait,
}

#[derive(Debug, Args)]
pub struct OptimizeArgs {
    #[arg(long, value_enum)]
    pub mode: OptimizeMode,
    /// Marked fraction λ; defaults to 2⁻²⁰ for known-lambda and 2⁻⁴⁰ otherwise.
    #[arg(long)]
    pub lambda: Option<f64>,
    #[arg(long, default_value_t = 0.4038)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.975)]
    pub alpha: f64,
    /// `lo:hi` for known-lambda modes, `lo:hi:step` for the portrait.
    #[arg(long)]
    pub delta_range: Option<String>,
    /// `lo:hi:step`, portrait only.
    #[arg(long)]
    pub alpha_range: Option<String>,
    /// Write CSV here instead of JSON on stdout.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Backend {
    /// Simulate the FPGS circuit.
    Sim,
    /// Sample the exact FPGS output law.
    Model,
}

#[derive(Debug, Args)]
pub struct SearchArgs {
    #[arg(long)]
    pub qubo: PathBuf,
    #[arg(long, default_value_t = 0.4038)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.975)]
    pub alpha: f64,
    #[arg(long)]
    pub max_queries: Option<u64>,
    #[arg(long)]
    pub max_rounds: Option<u64>,
    /// Stop once a value at least this large is found.
    #[arg(long)]
    pub target: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1)]
    pub trials: u64,
    #[arg(long, value_enum, default_value_t = Backend::Model)]
    pub backend: Backend,
    /// Ancilla parallelism of the simulated marker.
    #[arg(long, default_value_t = 1)]
    pub lambda: usize,
    /// Restart ℓ at 1 after every improvement (experimental).
    #[arg(long)]
    pub reset_on_success: bool,
    /// Draw ⌈log₂(n)²⌉ free uniform samples first.
    #[arg(long)]
    pub warm_start: bool,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["graph", "qubo"])))]
pub struct BenchmarkArgs {
    /// Edge list; the benchmark maximises the cut.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    #[arg(long)]
    pub qubo: Option<PathBuf>,
    #[arg(long, default_value_t = 4)]
    pub rounds: u32,
    #[arg(long, default_value_t = 0.4038)]
    pub delta: f64,
    #[arg(long, default_value_t = 1.975)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.2)]
    pub gas_growth: f64,
    /// Recorded in the manifest; the chain itself is exact.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Per-round statistics CSV.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
    /// Per-round value distributions CSV.
    #[arg(long)]
    pub distributions: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CircuitKind {
    Encoder,
    UQubo,
    PhaseBlock,
    Marker,
    Fpgs,
}

/// Which circuit to build from a QUBO.
#[derive(Debug, Args)]
pub struct BuildOpts {
    #[arg(long, value_enum, default_value_t = CircuitKind::Encoder)]
    pub kind: CircuitKind,
    /// Marker and FPGS threshold: marks `f(x) > T`.
    #[arg(long, value_name = "T")]
    pub threshold: Option<f64>,
    /// Marker phase, radians.
    #[arg(long, default_value_t = std::f64::consts::PI)]
    pub beta: f64,
    /// FPGS fixed-point parameter.
    #[arg(long, default_value_t = 0.4038)]
    pub delta: f64,
    /// FPGS rounds.
    #[arg(long, default_value_t = 1)]
    pub l: u64,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("input").required(true).args(["circuit", "qubo"])))]
pub struct ResourcesArgs {
    /// Stored circuit JSON.
    #[arg(long)]
    pub circuit: Option<PathBuf>,
    #[arg(long)]
    pub qubo: Option<PathBuf>,
    #[arg(long)]
    pub d: Option<u32>,
    #[arg(long, default_value_t = 1)]
    pub lambda: usize,
    #[arg(long)]
    pub garbage_free: bool,
    #[command(flatten)]
    pub build: BuildOpts,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Any file written by a subcommand.
    pub file: PathBuf,
    /// Where the rerun writes; stdout if omitted.
    #[arg(long, short)]
    pub out: Option<PathBuf>,
}

fn configure_threads() -> anyhow::Result<()> {
    if let Ok(v) = std::env::var("FPGAS_THREADS") {
        let n: usize = v
            .parse()
            .ok()
            .filter(|&n| n > 0)
            .ok_or_else(|| anyhow::anyhow!("FPGAS_THREADS must be a positive integer, got {v:?}"))?;
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

/// 1 for bad input, 2 when the library reports a broken invariant.
fn exit_code(err: &anyhow::Error) -> u8 {
    let internal = err
        .chain()
        .any(|e| e.downcast_ref::<fpgas_core::Error>().is_some_and(|e| e.is_internal()));
    if internal {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse_from(std::iter::once("fpgas".to_string()).chain(args.iter().cloned())) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let result = std::panic::catch_unwind(|| configure_threads().and_then(|_| commands::run(cli, &args)));
    match result {
        Ok(Ok(())) => ExitCode::SUCCESS,
        Ok(Err(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
        // the panic message is already on stderr
        Err(_) => ExitCode::from(2),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn internal_errors_map_to_two() {
        let internal = anyhow::Error::from(fpgas_core::Error::Invariant("leak".into())).context("simulating");
        assert_eq!(exit_code(&internal), 2);
        let input = anyhow::Error::from(fpgas_core::Error::Parameter("delta".into()));
        assert_eq!(exit_code(&input), 1);
        assert_eq!(exit_code(&anyhow::anyhow!("missing file")), 1);
    }

    #[test]
    fn cli_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
