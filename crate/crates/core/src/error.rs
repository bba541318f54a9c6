use std::fmt;

/// Errors produced anywhere in the library.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("cycle detected: {}", CyclePath(.0))]
    CycleDetected(Vec<usize>),

    #[error("node {node}: parent index {parent} out of range for {n} nodes")]
    IndexOutOfRange { node: usize, parent: usize, n: usize },

    #[error("node {node} lists itself as a parent")]
    SelfLoop { node: usize },

    #[error("node {node}: parent {parent} listed more than once")]
    DuplicateParent { node: usize, parent: usize },

    #[error("invalid value for `{field}`: {reason}")]
    InvalidConfig { field: &'static str, reason: String },

    #[error("infeasible configuration: {0}")]
    InfeasibleConfig(String),

    #[error("{what}: n = {n} exceeds the limit of {limit}")]
    TooLarge {
        what: &'static str,
        n: usize,
        limit: usize,
    },

    #[error("node {child}: negative row {row} has non-positive alpha {alpha}")]
    NonPositiveAlpha { child: usize, row: usize, alpha: f64 },

    #[error("edge {from} -> {to} is not present in the graph")]
    EdgeNotPresent { from: usize, to: usize },

    #[error("node {node} has no entries in the local score cache")]
    InfeasibleCache { node: usize },

    #[error("node mismatch: {0}")]
    NodeMismatch(String),

    #[error("invalid network: {0}")]
    InvalidNetwork(String),

    #[error("invalid dataset: {0}")]
    InvalidDataset(String),

    #[error("line {line}, column {column}: {message}")]
    Parse {
        line: u64,
        column: usize,
        message: String,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidConfig {
            field,
            reason: reason.into(),
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_usage(&self) -> bool {
        matches!(self, Error::InvalidConfig { .. })
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

struct CyclePath<'a>(&'a [usize]);

impl fmt::Display for CyclePath<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for node in self.0 {
            write!(f, "{node} -> ")?;
        }
        match self.0.first() {
            Some(first) => write!(f, "{first}"),
            None => Ok(()),
        }
    }
}
