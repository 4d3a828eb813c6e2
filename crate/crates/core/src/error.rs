use std::io;
use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("fields live on different grids")]
    GridMismatch,

    #[error("field has {found} samples but grid has {expected} nodes")]
    LengthMismatch { expected: usize, found: usize },

    #[error("non-finite value at node {index}")]
    NonFinite { index: usize },

    #[error("bad field file: {0}")]
    Format(String),

    #[error("field file size mismatch: header implies {expected} bytes of samples, found {found}")]
    SizeMismatch { expected: u64, found: u64 },

    #[error("{path}: {source}")]
    File {
        path: PathBuf,
        #[source]
        source: io::Error,
    },

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error("direction must be a unit vector (|xi| = {norm})")]
    NotUnitVector { norm: f64 },

    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("need at least {needed} samples, got {found}")]
    TooFewSamples { needed: usize, found: usize },

    #[error("non-uniform sampling: {0}")]
    NonUniform(String),

    #[error("insufficient angular coverage: {found} angles, need at least {needed}")]
    InsufficientAngles { needed: usize, found: usize },

    #[error("carrier under-resolved: dx = {dx} exceeds pi*h/8 = {limit}")]
    UnderResolved { dx: f64, limit: f64 },

    #[error("solver produced non-finite values at step {step} (t = {t})")]
    SolverBlowUp { step: usize, t: f64 },

    #[error("mass drift {drift:e} exceeds tolerance {tol:e} at step {step}")]
    MassDrift { step: usize, drift: f64, tol: f64 },

    #[error("a1 integration unstable: halved-step disagreement {diff:e}")]
    CorrectionUnstable { diff: f64 },

    #[error("sample point {index} lies outside the computational box")]
    OutsideBox { index: usize },

    #[error("signal lost at sample {index}: |w| = {modulus}")]
    SignalLost { index: usize, modulus: f64 },

    #[error("sampling too coarse: unwrap increment residual {residual} at sample {index}")]
    SamplingTooCoarse { index: usize, residual: f64 },

    #[error("anchor {0}")]
    BadAnchor(String),

    #[error("slope fit: {0}")]
    Fit(String),

    #[error("config: {0}")]
    Config(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),
}
