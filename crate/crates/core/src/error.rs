use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("length {0} is not a power of 4")]
    NotPowerOfFour(usize),

    #[error("matrix is not unitary (deviation {0:e})")]
    NotUnitary(f64),

    #[error("matrix is not Hermitian (deviation {0:e})")]
    NotHermitian(f64),

    #[error("conjugation through non-Clifford gate `{0}` is unsupported")]
    UnsupportedConjugation(String),

    #[error("hard cycle is neither Clifford nor a product of single-qubit gates: {0}")]
    UnsupportedHardCycle(String),

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("no noise rule for hard cycle `{0}`")]
    MissingCycleRule(String),

    #[error("qubit count {0} exceeds simulator limit {1}")]
    TooManyQubits(usize, usize),

    #[error("invalid readout confusion: {0}")]
    InvalidReadout(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("exponential fit is degenerate: {0}")]
    FitDegenerate(String),

    #[error("channel fit failed: best residual {residual:e}")]
    FitFailed { residual: f64 },

    #[error("missing data: {0}")]
    Missing(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
