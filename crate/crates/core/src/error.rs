use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("bitstring has length {got}, expected {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid coefficient matrix: {0}")]
    InvalidMatrix(String),

    #[error("f({config}) = {value} does not fit in a {width}-bit two's-complement register")]
    ValueOverflow { config: String, value: f64, width: u32 },

    #[error("enumerating {n} variables exceeds the cap of {cap}")]
    EnumerationCap { n: usize, cap: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("qubit {qubit} is out of range for a {num_qubits}-qubit register file")]
    QubitOutOfRange { qubit: usize, num_qubits: usize },

    #[error("{qubits} qubits exceed the simulator cap of {cap}")]
    TooManyQubits { qubits: usize, cap: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("{0} gates must be lowered before export")]
    Unlowered(&'static str),

    #[error("invariant violated: {0}")]
    Invariant(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that indicate a broken internal guarantee rather than bad input.
    pub fn is_internal(&self) -> bool {
        matches!(self, Error::Invariant(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
