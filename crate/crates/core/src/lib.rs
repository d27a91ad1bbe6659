//! Sequence and time-series learning by sliding-window segmentation.
//!
//! Variable-length multivariate sequences (optionally with irregular time
//! stamps and static context data) are normalised in length, cut into
//! fixed-width segments, reduced to per-channel statistical features and
//! handed to a terminal estimator. The whole chain lives in a [`Pype`],
//! whose stage parameters are addressable by `"stage.param"` paths so that
//! segmentation parameters can be tuned with [`grid_search`] alongside the
//! estimator's own hyperparameters.
//!
//! Data-parallel inner loops (segmentation across instances, feature
//! extraction across segments, kernel rows, grid-search combinations) use
//! rayon when the `parallel` feature is enabled. Every parallel path has a
//! sequential twin selected through [`Exec`] and produces identical output.

pub mod dataset;
pub mod error;
pub mod estimators;
pub mod exec;
pub mod features;
pub mod io;
pub mod linalg;
pub mod model_selection;
pub mod pipeline;
pub mod synth;
pub mod transforms;

pub use dataset::{
    Schema, SequenceDataset, SequenceInstance, SequenceTarget, Target, TargetKind,
    ValidationReport, ValueKind, Violation,
};
pub use error::{Error, Result};
pub use exec::Exec;
pub use features::{FeatureFunction, FeatureMatrix, FeatureSet};
pub use model_selection::{
    grid_search, split_instances, temporal_k_fold, temporal_split, FoldPlan, GridSearchResult,
    ParamGrid, SplitPair,
};
pub use pipeline::{Predictions, Pype, Stage, StageSpec};
pub use transforms::{SegmentParams, SegmentSet, TargetStrategy, Targets};
