//! Length normalisation, sliding-window segmentation and feature scaling.

pub mod length;
pub mod scaler;
pub mod segment;

pub use length::{interpolate, pad, truncate, TruncateLength};
pub use scaler::ScalerState;
pub use segment::{
    num_segments, segment_fixed_target, segment_sequence_target, segment_with, whole_series,
    Segment, SegmentParams, SegmentSet, SegmentTarget, TargetStrategy, Targets,
};
