use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid frame: {0}")]
    InvalidFrame(String),

    #[error("mass functions are defined on different frames")]
    FrameMismatch,

    #[error("set {0:#06x} is not a subset of the frame")]
    OutsideFrame(u16),

    #[error("invalid mass function: {0}")]
    InvalidMass(String),

    #[error("completely conflicting evidence (conflict K = {0})")]
    TotalConflict(f64),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: malformed file: {reason}")]
    Format { path: PathBuf, reason: String },

    #[error("{path}: payload size mismatch: expected {expected} bytes, found {actual}")]
    SizeMismatch { path: PathBuf, expected: u64, actual: u64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("label {label} is outside the frame of {frame_len} classes")]
    LabelOutsideFrame { label: u8, frame_len: usize },

    #[error("unknown region id {0}")]
    UnknownRegion(u32),

    #[error("regions {0} and {1} are not adjacent")]
    NotAdjacent(u32, u32),

    #[error("regions overlap at pixel ({row}, {col})")]
    OverlappingRegions { row: usize, col: usize },

    #[error("empty region")]
    EmptyRegion,

    #[error("model has no histogram for feature {feature} and class {class}")]
    UnknownFeature { feature: String, class: String },

    #[error("unknown class {0}")]
    UnknownClass(String),

    #[error("empty training set")]
    EmptyTrainingSet,

    #[error("contingency table contains no pixels")]
    EmptyTable,

    #[error("label map contains no labeled pixels")]
    Unlabeled,

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn format(path: impl Into<PathBuf>, reason: impl Into<String>) -> Self {
        Error::Format {
            path: path.into(),
            reason: reason.into(),
        }
    }
}
