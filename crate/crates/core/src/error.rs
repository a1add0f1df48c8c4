use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("index {index} out of range for {len} variables")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("invalid clause: {0}")]
    InvalidClause(String),

    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("self-loop on vertex {0}")]
    SelfLoop(usize),

    #[error("{n} variables exceeds the exhaustive limit of {limit}")]
    ExhaustiveLimit { n: usize, limit: usize },

    #[error("{n} qubits exceeds the ceiling of {limit}")]
    QubitCeiling { n: usize, limit: usize },

    #[error("matrix is not unitary (deviation {0:.3e})")]
    NonUnitary(f64),

    #[error("phase {index} has modulus {modulus}, expected 1")]
    NonUnitPhase { index: usize, modulus: f64 },

    #[error("post-selection has zero probability ({0:.3e})")]
    PostSelectionImpossible(f64),

    #[error("recovered histogram has imaginary part {imag:.3e} at v={value}")]
    NonRealRecovery { value: usize, imag: f64 },

    #[error("value {value} is {distance:.3e} away from the 2^-n lattice")]
    RoundingFailure { value: usize, distance: f64 },

    #[error("conditioning event has zero mass")]
    ZeroConditioningMass,

    #[error("invalid angles: {0}")]
    InvalidAngles(String),

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: &'static str, reason: String },

    #[error("both amplitudes vanished after amplification")]
    DegeneratePair,

    #[error("rejection sampler exhausted {0} attempts")]
    AttemptsExhausted(u64),

    #[error("integrator norm drift {drift:.3e} at step {step}")]
    StepInstability { step: usize, drift: f64 },

    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("io: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(field: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter { field, reason: reason.into() }
}
