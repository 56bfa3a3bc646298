use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid edge {{{0},{1}}}: endpoints must be distinct vertices in 1..={max}", max = crate::graphs::MAX_VERTICES)]
    InvalidEdge(u32, u32),

    #[error("vertex {vertex} outside [1, {m}]")]
    VertexOutOfRange { vertex: u32, m: u32 },

    #[error("double graph parts share edge {0}")]
    PartsNotDisjoint(String),

    #[error("edge index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("resource cap exceeded: {what} needs {needed} objects, cap is {cap}")]
    CapExceeded {
        what: String,
        needed: String,
        cap: u64,
    },

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("no sunflower with {p} petals among {sets} distinct {side} vertex sets (threshold {threshold})")]
    SunflowerNotFound {
        side: String,
        sets: usize,
        p: usize,
        threshold: String,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("premise violated: {premise}; witness: {witness}")]
    Premise { premise: String, witness: String },

    #[error("rail conflict at index {0}: both x and y rails are 1")]
    RailConflict(usize),

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("circuit error: {0}")]
    Circuit(String),

    #[error("{0}")]
    Bounds(String),
}

impl Error {
    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}
