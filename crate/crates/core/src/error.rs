use thiserror::Error;

/// Errors raised by the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("qubit index {index} out of range for {n_qubits} qubits")]
    QubitIndex { index: usize, n_qubits: usize },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("rotation axis must be X, Y or Z, got I")]
    InvalidAxis,

    #[error("invalid ansatz spec: {0}")]
    InvalidSpec(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("invalid config: {0}")]
    Config(String),

    /// A resource guard refused the request. `log_estimate` is the natural log of the
    /// predicted operation count that tripped it.
    #[error("resource guard: {message} (log op-count estimate {log_estimate:.3})")]
    Resource { message: String, log_estimate: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error("internal consistency check failed: {0}")]
    Internal(String),

    #[error("optimization diverged: {0}")]
    Divergence(String),

    #[error("io error on {path}: {message}")]
    Io { path: String, message: String },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Short stable name of the variant, for structured error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::QubitIndex { .. } => "qubit_index",
            Error::Dimension(_) => "dimension",
            Error::InvalidAxis => "invalid_axis",
            Error::InvalidSpec(_) => "invalid_spec",
            Error::Domain(_) => "domain",
            Error::Config(_) => "config",
            Error::Resource { .. } => "resource",
            Error::Parse(_) => "parse",
            Error::Internal(_) => "internal",
            Error::Divergence(_) => "divergence",
            Error::Io { .. } => "io",
        }
    }
}
