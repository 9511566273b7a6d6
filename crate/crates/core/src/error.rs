use std::path::PathBuf;

use thiserror::Error;

/// Everything that can go wrong inside the pipeline.
///
/// The CLI maps [`Error::NumericFailure`] to its own exit code; every other
/// variant is a data or validation problem.
#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: u64, msg: String },
    #[error("ordering error at line {line}: {msg}")]
    Ordering { line: u64, msg: String },
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("extrapolation not allowed: {0}")]
    Extrapolation(String),
    #[error("no trace at inline {inline}, xline {xline}")]
    MissingTrace { inline: i64, xline: i64 },
    #[error("no overlap between well log and seismic trace: {0}")]
    NoOverlap(String),
    #[error("invalid well tops: {0}")]
    InvalidTops(String),
    #[error("zone {0} has no samples")]
    EmptyZone(String),
    #[error("predictor {0} has zero variance")]
    DegeneratePredictor(usize),
    #[error("target has zero range")]
    DegenerateTarget,
    #[error("unknown well '{0}'")]
    UnknownWell(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("capacity guard failed: {params} trainable parameters need at least {needed} patterns, got {available}")]
    Capacity {
        params: usize,
        needed: usize,
        available: usize,
    },
    #[error("no candidate hidden size satisfies the capacity guard")]
    NoFeasibleSize,
    #[error("numeric failure at epoch {epoch}: {msg}")]
    NumericFailure { epoch: usize, msg: String },
    #[error("correlation undefined: zero variance")]
    UndefinedCorrelation,
    #[error("invalid window size {0}: must be odd and positive")]
    InvalidWindow(usize),
    #[error("geometry mismatch: {0}")]
    Geometry(String),
    #[error("inline {0} not in volume")]
    MissingInline(i64),
    #[error("inconsistent comparison: {0}")]
    InconsistentComparison(String),
    #[error("malformed model file: {0}")]
    MalformedModel(String),
    #[error("unsupported model format '{found}', expected '{expected}'")]
    VersionMismatch { found: String, expected: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn parse(line: u64, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }

    /// True for failures of the optimizer itself rather than of the inputs.
    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::NumericFailure { .. })
    }
}
