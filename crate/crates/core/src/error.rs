use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension must be at least 1")]
    ZeroDimension,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("spectrum is not contained in the admissible frequency set: {0}")]
    SpectrumViolation(String),

    #[error("zero polynomial: {0}")]
    ZeroPolynomial(&'static str),

    #[error("no admissible generator in [1, {p}) for the given difference set")]
    NoGenerator { p: u64 },

    #[error("point set is not certified: {0}")]
    Uncertified(String),

    #[error("size cap exceeded: {what} = {size} > {cap}")]
    CapExceeded {
        what: &'static str,
        size: usize,
        cap: usize,
    },

    #[error("frame system is not tight: residual {residual:e}")]
    NotTightFrame { residual: f64 },

    #[error("barrier step stalled at iteration {step}: {detail}")]
    BarrierStall { step: usize, detail: String },

    #[error("eigen solve failed residual check: {residual:e}")]
    EigenResidual { residual: f64 },

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
