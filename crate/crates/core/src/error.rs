use thiserror::Error;

/// Error type shared across the pipeline.
///
/// Variants are grouped by the CLI exit-code contract: config problems exit 2,
/// data problems 3, model problems 4, anything else 5.
#[derive(Debug, Error)]
pub enum Error {
    /// A caller violated an operation precondition (bad argument, degenerate
    /// signal, shape mismatch).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Configuration file missing, unparsable, or violating a cross-field
    /// constraint.
    #[error("config error: {0}")]
    Config(String),

    /// Data files missing or malformed (manifests, waveforms, archives).
    #[error("data error: {0}")]
    Data(String),

    /// Model-level failure: checkpoint version/architecture mismatch,
    /// training divergence.
    #[error("model error: {0}")]
    Model(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    /// Exit code for the CLI contract (0 ok, 2 config, 3 data, 4 model, 5 internal).
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Config(_) => 2,
            Error::InvalidInput(_) | Error::Data(_) | Error::Io(_) => 3,
            Error::Model(_) => 4,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
