use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

/// Failures raised by the library. The CLI maps each variant onto an
/// exit code via [`Error::class`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("node {node}: {reason}")]
    Node { node: usize, reason: String },

    #[error("unsupported input: {0}")]
    Unsupported(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("matrix is not diagonalizable (eigenvector condition number {condition:.3e})")]
    NotDiagonalizable { condition: f64 },

    #[error("unstable recursion (spectral radius {rho:.6}): {detail}")]
    Unstable { rho: f64, detail: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short machine-readable class name.
    pub fn class(&self) -> &'static str {
        match self {
            Error::Dimension(_) => "dimension",
            Error::InvalidInput(_) => "invalid-input",
            Error::Node { .. } => "node",
            Error::Unsupported(_) => "unsupported",
            Error::Numerical(_) => "numerical",
            Error::NotDiagonalizable { .. } => "not-diagonalizable",
            Error::Unstable { .. } => "stability",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}
