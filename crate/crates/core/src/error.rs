use thiserror::Error;

/// Errors raised by the simulator, the certificate engine and the I/O layer.
#[derive(Debug, Error)]
pub enum IpmError {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("dimension mismatch: expected {expected} values, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("non-finite value at flat index {0}")]
    NonFinite(usize),

    #[error("conjugate symmetry violated (defect {0:.3e})")]
    SymmetryViolation(f64),

    #[error("unsupported on {domain} domain: {what}")]
    Unsupported { domain: &'static str, what: String },

    #[error("source is not mean-zero: |c(0,0)| = {0:.3e}")]
    NonZeroMean(f64),

    #[error("Sobolev norm overflowed at mode ({k1}, {k2})")]
    NormOverflow { k1: i64, k2: i64 },

    #[error("RK4 stage {stage} produced a non-finite value")]
    NonFiniteStage { stage: usize },

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("geometry error: {0}")]
    Geometry(String),

    #[error("too few samples: need at least {need}, got {got}")]
    TooFewSamples { need: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },

    #[error("snapshot: {0}")]
    Snapshot(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, IpmError>;
