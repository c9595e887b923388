use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("parity mismatch: real BCH schemes need n and s of different parity (got n={n}, s={s})")]
    ParityMismatch { n: usize, s: usize },

    #[error("duplicate interpolation node at index {first} and {second}")]
    DuplicateNode { first: usize, second: usize },

    #[error("triangular system has a zero pivot at index {index}")]
    SingularTriangular { index: usize },

    #[error("generalized Vandermonde matrix is numerically singular")]
    SingularVandermonde,

    #[error("wrong non-straggler set size: expected {expected}, got {got}")]
    WrongSetSize { expected: usize, got: usize },

    #[error("index set must be nonempty")]
    EmptySet,

    #[error("index {index} out of range for n={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("index {0} appears more than once")]
    DuplicateIndex(usize),

    #[error("construction check failed: {0}")]
    ConstructionCheck(String),

    #[error("graph generation failed after {attempts} attempts")]
    GenerationFailure { attempts: usize },

    #[error("graph is not connected")]
    Disconnected,

    #[error("exhaustive verification needs {count} sets, above the cap of {cap}")]
    CapExceeded { count: u128, cap: u128 },

    #[error("too few examples: m={m} is smaller than n={n}")]
    TooFewExamples { m: usize, n: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("worker {worker} does not hold partition {part}")]
    MissingPart { worker: usize, part: usize },

    #[error("malformed input: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
