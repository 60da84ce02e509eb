use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("node {0} is not part of the network")]
    UnknownNode(u64),

    #[error("node {0} appears more than once in the node list")]
    DuplicateNode(u64),

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("{what} = {got} exceeds the limit of {limit}")]
    Capacity {
        what: &'static str,
        got: usize,
        limit: usize,
    },

    #[error("qubit index {index} out of range for a {n}-qubit register")]
    QubitIndex { index: usize, n: usize },

    #[error("{0}")]
    Domain(String),

    #[error("no connected {size}-node subgraph found after {restarts} restarts")]
    SamplingExhausted { size: usize, restarts: usize },

    #[error("dataset incomplete after {attempts} sampled pairs; bucket fill (hd, count): {fill:?}")]
    PartialDataset {
        attempts: usize,
        fill: Vec<(u32, usize)>,
    },

    #[error("objective returned non-finite value {value} at evaluation {evaluation}")]
    NonFiniteObjective {
        evaluation: usize,
        value: f64,
        trace: Vec<f64>,
    },

    #[error("invalid configuration:\n  {}", .0.join("\n  "))]
    Config(Vec<String>),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
