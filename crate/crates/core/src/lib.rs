//! QUBO dictionary encoders, fixed-point Grover search and adaptive-search benchmarks.
//!
//! Bit conventions: a configuration `x = (x_0, …, x_{n−1})` is packed with `x_0`
//! as the most significant bit (see [`bits`]), and qubit 0 of a circuit is the
//! most significant bit of a statevector index.

// `!(x > 0.0)` style checks deliberately reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bits;
pub mod circuit;
pub mod encoder;
pub mod error;
pub mod fpgs;
pub mod graph;
pub mod markov;
pub mod qubo;
pub mod schedule;
pub mod search;
pub mod sim;

pub use circuit::{Circuit, Gate, ResourceReport};
pub use encoder::EncoderConfig;
pub use error::{Error, Result};
pub use fpgs::FpgsParams;
pub use graph::Graph;
pub use markov::{BenchmarkConfig, BenchmarkReport, ChainState};
pub use qubo::{QuboProblem, RewriteCoefficients, ValueDistribution, ValueMode};
pub use schedule::{ScheduleBound, ScheduleParams};
pub use search::{
    ModelBackend, OracleBackend, SearchOptions, SearchOutcome, SearchState, SimBackend, StoppingCondition,
};
pub use sim::{QuantumState, SparseState, Statevector};
