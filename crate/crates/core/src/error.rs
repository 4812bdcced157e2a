use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("{value} is not invertible modulo {modulus}")]
    NotInvertible { value: u64, modulus: u64 },

    #[error("value does not fit the residue range of the pool ({bits} bits available)")]
    Range { bits: u64 },

    #[error("prime pool is empty")]
    EmptyPool,

    #[error("moduli mismatch: {0} vs {1}")]
    ModulusMismatch(u64, u64),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("matrix is singular modulo {0}")]
    Singular(u64),

    #[error("matrix of size {size} modulo {modulus} is too large for the self-reducible path")]
    TooLargeForSelfReducible { size: usize, modulus: u64 },

    #[error("change touches {sources} sources and {targets} targets, bound is {k}")]
    BatchTooWide {
        sources: usize,
        targets: usize,
        k: usize,
    },

    #[error("node {node} out of range 1..={n}")]
    NodeOutOfRange { node: usize, n: usize },

    #[error("self-loop on node {0} is not supported by this engine")]
    SelfLoop(usize),

    #[error("edge ({0}, {1}) is already present")]
    EdgePresent(usize, usize),

    #[error("edge ({0}, {1}) is not present")]
    EdgeAbsent(usize, usize),

    #[error("edge ({0}, {1}) is both inserted and deleted")]
    ConflictingChange(usize, usize),

    #[error("series degree bound or modulus mismatch")]
    SeriesMismatch,

    #[error("matrix is not normalized (constant coefficient matrix must be the identity)")]
    NotNormalized,

    #[error("coefficient index {index} exceeds truncation degree {degree}")]
    DegreeExceeded { index: usize, degree: usize },

    #[error("prime pool too small: {have_bits} bits, need more than {need_bits}")]
    UndersizedPool { have_bits: u64, need_bits: u64 },

    #[error("evaluation point set too small: {have} points, need {need}")]
    UndersizedPoints { have: usize, need: usize },

    #[error("prime {0} is not part of the pool")]
    UnknownPrime(u64),

    #[error("insufficient valid data for extraction")]
    InsufficientData,

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("step {step}: {msg}")]
    Step { step: usize, msg: String },

    #[error("{0}")]
    Io(String),

    #[error("{0}")]
    Unsupported(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
