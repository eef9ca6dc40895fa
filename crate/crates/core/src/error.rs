use alloc::string::String;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("index {index} out of range for {len} modes")]
    IndexOutOfRange { index: usize, len: usize },
    #[error("mode {0} is not an ancilla")]
    NotAncilla(usize),
    #[error("operator is not a ladder term: {0}")]
    NotLadder(String),
    #[error("register of {0} qubits exceeds the dense limit")]
    DenseLimit(usize),
    #[error("size mismatch: {0}")]
    Dimension(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("quadrature did not converge (estimated error {0:e})")]
    Quadrature(f64),
    #[error("quadratic program failed: {0}")]
    QuadraticProgram(String),
    #[error("outer rate search failed: {0}")]
    Bracket(String),
    #[error("singular linear system: {0}")]
    Singular(String),
    #[error(
        "dissipation rate {lambda} below the minimum {lambda_min}; increase the Trotter step, \
         use qubits with a larger T1, or shorten the Trotter step circuit"
    )]
    RateTooSmall { lambda: f64, lambda_min: f64 },
    #[error("payload is not unitary (deviation {0:e})")]
    NotUnitary(f64),
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("missing Hadamard plan: {0}")]
    MissingPlan(String),
}

pub type Result<T> = core::result::Result<T, Error>;
