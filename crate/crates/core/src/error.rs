use std::path::PathBuf;

use crate::dataset::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("line {line}: malformed record: {message}")]
    Parse { line: usize, message: String },

    #[error("line {line}: schema mismatch: {message}")]
    Schema { line: usize, message: String },

    #[error("dataset is empty")]
    EmptyDataset,

    #[error("invalid dataset: {0}")]
    Invalid(ValidationReport),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("index {index} out of range for dataset of {len} instances")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("operation requires {expected} targets, dataset has {found}")]
    WrongTargetKind { expected: String, found: String },

    #[error(
        "segmentation produced no segments: every series is shorter than the window width {width}"
    )]
    EmptyOutput { width: usize },

    #[error("target strategy {strategy} cannot be applied to {kind} targets")]
    StrategyKindMismatch { strategy: String, kind: String },

    #[error("instance {instance} has a time vector and cannot be padded")]
    TimePaddingUnsupported { instance: usize },

    #[error("instance {instance} has no time vector")]
    MissingTimeVector { instance: usize },

    #[error("instance {instance} has {len} samples; at least {min} are required")]
    DegenerateSeries {
        instance: usize,
        len: usize,
        min: usize,
    },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("unknown feature `{name}`; available: {available}")]
    UnknownFeature { name: String, available: String },

    #[error("segment width {width} is too small for feature `{feature}`")]
    WidthTooSmall { width: usize, feature: String },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("test fraction must lie in (0, 1), got {0}")]
    InvalidFraction(f64),

    #[error("instance split needs at least 2 instances, got {0}")]
    TooFewInstances(usize),

    #[error("instance {instance} of length {len} cannot be cut: one side would be empty")]
    DegenerateCut { instance: usize, len: usize },

    #[error("instance {instance} of length {len} is shorter than k = {k}")]
    SeriesTooShort {
        instance: usize,
        len: usize,
        k: usize,
    },

    #[error("unknown parameter path `{0}`")]
    UnknownParamPath(String),

    #[error("invalid pipeline: {0}")]
    InvalidPipeline(String),

    #[error("pipeline is not fitted")]
    NotFitted,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("linear system is not positive definite (pivot {pivot})")]
    SingularSystem { pivot: usize },

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("metric requires at least one element")]
    Empty,

    #[error("every grid combination failed to produce a finite score")]
    NoValidCombination,

    #[error("stage `{stage}`: {source}")]
    Stage {
        stage: String,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    pub(crate) fn in_stage(self, stage: &str) -> Self {
        match self {
            e @ Error::Stage { .. } => e,
            e => Error::Stage {
                stage: stage.to_string(),
                source: Box::new(e),
            },
        }
    }

    /// The innermost error, looking through stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            e => e,
        }
    }
}
