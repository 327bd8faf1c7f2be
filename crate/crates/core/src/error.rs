use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("matrix is not Hermitian (max deviation {0:e})")]
    NotHermitian(f64),

    #[error("Kraus set is not trace preserving (deviation {0:e})")]
    NotTracePreserving(f64),

    #[error("invalid GHZ grouping: {0}")]
    InvalidGrouping(String),

    #[error("conditioning on an event of probability {0:e}")]
    NullEvent(f64),

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("malformed input: {0}")]
    Parse(String),

    #[error("no sign change of score - 1 on the scan grid")]
    NoBracket,

    #[error("{0}")]
    NotMonotone(String),
}

impl Error {
    /// True for errors caused by bad user input rather than numerics.
    pub fn is_config_error(&self) -> bool {
        !matches!(self, Error::NoBracket | Error::NotMonotone(_) | Error::NullEvent(_))
    }
}
