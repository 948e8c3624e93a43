use thiserror::Error;

/// Errors raised while reading netlists and cell libraries.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("combinational cycle through net `{0}`")]
    Cycle(String),
    #[error("net `{0}` is used but never defined")]
    UndefinedNet(String),
    #[error("net `{0}` is defined more than once")]
    Redefined(String),
    #[error("line {line}: unsupported construct `{what}`")]
    Unsupported { line: usize, what: String },
    #[error("cell library contains no usable gates")]
    EmptyLibrary,
    #[error("unknown cell `{0}`")]
    UnknownCell(String),
}

impl ParseError {
    pub(crate) fn syntax(line: usize, column: usize, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

/// Errors raised by the mapping pipeline.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum MapError {
    #[error("cut size k={0} outside supported range 2..=6")]
    BadCutSize(usize),
    #[error("node {node} cannot be expressed by the library (cut functions: {functions})")]
    Unmatchable { node: u32, functions: String },
    #[error("output `{0}` needs an inverted phase but the library has no inverter")]
    NoInverter(String),
    #[error("network is not verified: {0}")]
    Unverified(String),
    #[error("equivalence check failed on output `{output}` for input pattern {pattern}")]
    NotEquivalent { output: String, pattern: String },
    #[error("interface mismatch: {0}")]
    InterfaceMismatch(String),
    #[error("instance too large for exhaustive search: {0}")]
    TooLarge(String),
}
