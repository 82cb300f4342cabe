use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("symbol {symbol} outside alphabet of size {size}")]
    AlphabetViolation { symbol: usize, size: usize },
    #[error("probabilities sum to {sum}, expected 1")]
    Normalization { sum: f64 },
    #[error("observation codec: {0}")]
    Codec(String),
    #[error("history has probability zero under the model")]
    ImpossibleHistory,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("index constraint violated: {0}")]
    Index(String),
    #[error("value distribution for action {action} has zero expected value")]
    DegenerateValue { action: usize },
    #[error("variable spec matched {0} variables, expected exactly one")]
    SpecMatch(usize),
    #[error("candidate space is empty")]
    EmptySpace,
    #[error("sequences have unequal lengths {0} and {1}")]
    UnequalLengths(usize, usize),
    #[error("chain has {0} essential classes; stationary distribution is not unique")]
    NonUniqueStationary(usize),
    #[error("state {0} never returns to itself; period undefined")]
    UndefinedPeriod(usize),
    #[error("syntax error at {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("arity mismatch for {symbol}: expected {expected}, found {found}")]
    Arity {
        symbol: String,
        expected: usize,
        found: usize,
    },
    #[error("formula kind: {0}")]
    Kind(String),
    #[error("uninterpreted symbol {0}")]
    Interpretation(String),
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
    #[error("empty profile")]
    EmptyProfile,
    #[error("weights sum to {0}, expected 1")]
    UnnormalizedWeights(f64),
    #[error("model format: line {line}: {msg}")]
    Format { line: usize, msg: String },
    #[error("io: {0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}
