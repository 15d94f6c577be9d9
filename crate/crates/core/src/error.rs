//! Crate-wide error type.
//!
//! Variants are grouped by the stage that raises them; the CLI maps each
//! group to a distinct exit code (config 2, sampler 3, diagnostics 4).

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    // Geometry and configurations.
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("point coordinates must be finite")]
    NonFinitePoint,
    #[error("box needs lower < upper on every axis")]
    InvalidBox,
    #[error("dilation radius must be finite and nonnegative")]
    InvalidRadius,
    #[error("configuration contains a repeated point")]
    DuplicatePoint,
    #[error("configurations overlap: {0}")]
    Overlap(String),
    #[error("point lies outside the declared window")]
    PointOutsideWindow,

    // Energy models.
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error("operation unsupported in dimension {0}")]
    UnsupportedDimension(usize),

    // Local energies.
    #[error("local energy undefined: environment energy is not finite")]
    InfiniteEnvironment,

    // Samplers.
    #[error("rejection sampler used up all {0} attempts")]
    RejectionExhausted(u64),
    #[error("invalid sampler spec: {0}")]
    InvalidSpec(String),

    // Diagnostics preconditions.
    #[error("sample set is empty")]
    EmptySampleSet,
    #[error("window must contain the region with margin at least {required}, has {available}")]
    MarginViolation { required: f64, available: f64 },
    #[error("all importance weights vanished; increase inner draws or shrink the region")]
    DegenerateNormalization,
    #[error("invalid diagnostic request: {0}")]
    InvalidDiagnostic(String),

    // Experiment configs and files.
    #[error("config line {line}: {message}")]
    ConfigParse { line: usize, message: String },
    #[error("invalid config: {0}")]
    ConfigInvalid(String),
    #[error("malformed file: {0}")]
    MalformedFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code the CLI reports for this error.
    pub fn exit_code(&self) -> i32 {
        use Error::*;
        match self {
            ConfigParse { .. } | ConfigInvalid(_) | InvalidModel(_) | InvalidSpec(_)
            | InvalidBox | InvalidRadius | UnsupportedDimension(_) => 2,
            RejectionExhausted(_) => 3,
            EmptySampleSet | MarginViolation { .. } | DegenerateNormalization
            | InvalidDiagnostic(_) | InfiniteEnvironment => 4,
            _ => 1,
        }
    }
}
