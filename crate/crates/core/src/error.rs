use thiserror::Error;

/// Errors produced by the simulator and its front-ends.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a precondition (bad index, malformed term, invalid graph, ...).
    #[error("{0}")]
    Domain(String),

    #[error("dimension mismatch: expected {expected} qubits, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// The requested problem size cannot be held in memory.
    #[error("cannot allocate {what} for {n} qubits")]
    Resource { what: &'static str, n: usize },

    #[error("cost vector cannot be stored as 16-bit levels: {0}")]
    NotRepresentable(String),

    #[error("objective returned non-finite value {value} at {params:?}")]
    NonFinite { value: f64, params: Vec<f64> },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
