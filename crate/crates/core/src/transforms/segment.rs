//! Sliding-window segmentation.
//!
//! Segments do not copy samples: a [`SegmentSet`] keeps its source dataset
//! behind an `Arc` and each [`Segment`] is a `(parent, start)` pair whose
//! window is a strided view into the parent's sample matrix.

use std::sync::Arc;

use ndarray::{s, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::dataset::{SequenceDataset, SequenceTarget, Target, TargetKind, ValueKind};
use crate::error::{Error, Result};
use crate::exec::Exec;

/// Window width and fractional overlap between consecutive windows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SegmentParams {
    pub width: usize,
    pub overlap: f64,
}

impl SegmentParams {
    pub fn new(width: usize, overlap: f64) -> Result<Self> {
        let p = Self { width, overlap };
        p.check()?;
        Ok(p)
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.width == 0 {
            return Err(Error::InvalidParameter("segment width must be ≥ 1".into()));
        }
        if !(0.0..1.0).contains(&self.overlap) {
            return Err(Error::InvalidParameter(format!(
                "segment overlap must lie in [0, 1), got {}",
                self.overlap
            )));
        }
        Ok(())
    }

    /// Distance between consecutive window starts: `max(1, ⌊w·(1 − overlap)⌋)`.
    pub fn step(&self) -> usize {
        ((self.width as f64 * (1.0 - self.overlap)).floor() as usize).max(1)
    }

    /// Start offsets of every window that fits in a series of `len` samples.
    pub fn starts(&self, len: usize) -> impl Iterator<Item = usize> {
        (0..num_segments(len, self)).map({
            let step = self.step();
            move |k| k * step
        })
    }
}

/// Number of windows of `params` that fit in `len` samples.
pub fn num_segments(len: usize, params: &SegmentParams) -> usize {
    if len < params.width {
        0
    } else {
        (len - params.width) / params.step() + 1
    }
}

/// How an aligned target window is reduced to one value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetStrategy {
    /// Element `w − 1`.
    #[default]
    Last,
    /// Element `⌊w/2⌋`.
    Middle,
    /// Arithmetic mean; real-valued sequences only.
    Mean,
    /// Keep the whole target window.
    PassThrough,
}

impl std::fmt::Display for TargetStrategy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TargetStrategy::Last => "last",
            TargetStrategy::Middle => "middle",
            TargetStrategy::Mean => "mean",
            TargetStrategy::PassThrough => "pass_through",
        })
    }
}

/// The target attached to one segment.
#[derive(Debug, Clone, PartialEq)]
pub enum SegmentTarget {
    Label(usize),
    Value(f64),
    Window(SequenceTarget),
}

/// Targets of many rows, stored by kind.
#[derive(Debug, Clone, PartialEq)]
pub enum Targets {
    Labels(Vec<usize>),
    Values(Vec<f64>),
    /// Unresolved target windows (pass-through segmentation).
    Windows(Vec<Vec<f64>>),
}

impl Targets {
    pub fn len(&self) -> usize {
        match self {
            Targets::Labels(v) => v.len(),
            Targets::Values(v) => v.len(),
            Targets::Windows(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn select(&self, rows: &[usize]) -> Self {
        match self {
            Targets::Labels(v) => Targets::Labels(rows.iter().map(|&i| v[i]).collect()),
            Targets::Values(v) => Targets::Values(rows.iter().map(|&i| v[i]).collect()),
            Targets::Windows(v) => Targets::Windows(rows.iter().map(|&i| v[i].clone()).collect()),
        }
    }

    pub fn as_labels(&self) -> Option<&[usize]> {
        match self {
            Targets::Labels(v) => Some(v),
            _ => None,
        }
    }

    pub fn as_values(&self) -> Option<&[f64]> {
        match self {
            Targets::Values(v) => Some(v),
            _ => None,
        }
    }

    fn from_segments(segments: &[Segment], kind: TargetKind, strategy: TargetStrategy) -> Self {
        let passthrough = matches!(kind, TargetKind::AlignedSequence(_))
            && strategy == TargetStrategy::PassThrough;
        let labels = matches!(
            kind,
            TargetKind::ClassLabel | TargetKind::AlignedSequence(ValueKind::Label)
        ) && strategy != TargetStrategy::Mean;
        if passthrough {
            Targets::Windows(
                segments
                    .iter()
                    .map(|s| match &s.target {
                        SegmentTarget::Window(w) => (0..w.len()).map(|i| w.get_f64(i)).collect(),
                        _ => unreachable!("pass-through segments carry windows"),
                    })
                    .collect(),
            )
        } else if labels {
            Targets::Labels(
                segments
                    .iter()
                    .map(|s| match s.target {
                        SegmentTarget::Label(l) => l,
                        _ => unreachable!("label segments carry labels"),
                    })
                    .collect(),
            )
        } else {
            Targets::Values(
                segments
                    .iter()
                    .map(|s| match s.target {
                        SegmentTarget::Value(v) => v,
                        _ => unreachable!("value segments carry values"),
                    })
                    .collect(),
            )
        }
    }
}

/// One window of a parent series.
#[derive(Debug, Clone, PartialEq)]
pub struct Segment {
    pub parent: usize,
    pub start: usize,
    pub target: SegmentTarget,
}

/// Fixed-width segments of a dataset, contiguous per parent and ordered by start.
#[derive(Debug, Clone)]
pub struct SegmentSet {
    source: Arc<SequenceDataset>,
    width: usize,
    strategy: TargetStrategy,
    segments: Vec<Segment>,
    dropped: Vec<usize>,
}

impl SegmentSet {
    pub fn len(&self) -> usize {
        self.segments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn channels(&self) -> usize {
        self.source.schema().channels
    }

    pub fn context_width(&self) -> usize {
        self.source.schema().context_width
    }

    pub fn target_kind(&self) -> TargetKind {
        self.source.schema().target_kind
    }

    pub fn source(&self) -> &SequenceDataset {
        &self.source
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Parents shorter than the window width; they produced no segments.
    pub fn dropped_parents(&self) -> &[usize] {
        &self.dropped
    }

    /// `w × d` view of segment `i`'s samples.
    pub fn window(&self, i: usize) -> ArrayView2<'_, f64> {
        let seg = &self.segments[i];
        self.source[seg.parent]
            .samples()
            .slice_move(s![seg.start..seg.start + self.width, ..])
    }

    pub fn context(&self, i: usize) -> Option<&[f64]> {
        self.source[self.segments[i].parent].context()
    }

    /// `(parent, start)` of every segment.
    pub fn provenance(&self) -> Vec<(usize, usize)> {
        self.segments.iter().map(|s| (s.parent, s.start)).collect()
    }

    pub fn targets(&self) -> Targets {
        Targets::from_segments(&self.segments, self.target_kind(), self.strategy)
    }
}

/// Segments a dataset with one target per series; each segment inherits it.
pub fn segment_fixed_target(
    dataset: impl Into<Arc<SequenceDataset>>,
    params: SegmentParams,
) -> Result<SegmentSet> {
    segment_with(dataset, params, TargetStrategy::default(), Exec::default())
}

/// Segments a dataset with aligned target sequences, resolving each target
/// window with `strategy`.
pub fn segment_sequence_target(
    dataset: impl Into<Arc<SequenceDataset>>,
    params: SegmentParams,
    strategy: TargetStrategy,
) -> Result<SegmentSet> {
    let dataset = dataset.into();
    if !matches!(dataset.schema().target_kind, TargetKind::AlignedSequence(_)) {
        return Err(Error::WrongTargetKind {
            expected: "aligned sequence".into(),
            found: dataset.schema().target_kind.to_string(),
        });
    }
    segment_with(dataset, params, strategy, Exec::default())
}

fn resolve(target: &Target, start: usize, width: usize, strategy: TargetStrategy) -> SegmentTarget {
    match target {
        Target::Label(l) => SegmentTarget::Label(*l),
        Target::Scalar(v) => SegmentTarget::Value(*v),
        Target::Sequence(seq) => {
            let window = seq.slice(start..start + width);
            match (strategy, &window) {
                (TargetStrategy::PassThrough, _) => SegmentTarget::Window(window),
                (TargetStrategy::Last, SequenceTarget::Labels(v)) => {
                    SegmentTarget::Label(v[width - 1])
                }
                (TargetStrategy::Middle, SequenceTarget::Labels(v)) => {
                    SegmentTarget::Label(v[width / 2])
                }
                (TargetStrategy::Last, SequenceTarget::Values(v)) => {
                    SegmentTarget::Value(v[width - 1])
                }
                (TargetStrategy::Middle, SequenceTarget::Values(v)) => {
                    SegmentTarget::Value(v[width / 2])
                }
                (TargetStrategy::Mean, SequenceTarget::Values(v)) => {
                    SegmentTarget::Value(v.iter().sum::<f64>() / width as f64)
                }
                (TargetStrategy::Mean, SequenceTarget::Labels(_)) => {
                    unreachable!("rejected before segmentation")
                }
            }
        }
    }
}

/// Segments any dataset. Fixed targets are mapped to every segment of their
/// parent; aligned targets are resolved with `strategy`. Series shorter than
/// the window are dropped and listed in [`SegmentSet::dropped_parents`].
pub fn segment_with(
    dataset: impl Into<Arc<SequenceDataset>>,
    params: SegmentParams,
    strategy: TargetStrategy,
    exec: Exec,
) -> Result<SegmentSet> {
    params.check()?;
    let source = dataset.into();
    if source.schema().target_kind == TargetKind::AlignedSequence(ValueKind::Label)
        && strategy == TargetStrategy::Mean
    {
        return Err(Error::StrategyKindMismatch {
            strategy: strategy.to_string(),
            kind: source.schema().target_kind.to_string(),
        });
    }
    let width = params.width;
    let per_parent: Vec<Vec<Segment>> = exec.map_range(source.len(), |parent| {
        let inst = &source[parent];
        params
            .starts(inst.len())
            .map(|start| Segment {
                parent,
                start,
                target: resolve(inst.target(), start, width, strategy),
            })
            .collect()
    });
    let dropped = per_parent
        .iter()
        .enumerate()
        .filter(|(_, s)| s.is_empty())
        .map(|(i, _)| i)
        .collect();
    let segments: Vec<Segment> = per_parent.into_iter().flatten().collect();
    if segments.is_empty() && !source.is_empty() {
        return Err(Error::EmptyOutput { width });
    }
    Ok(SegmentSet {
        source,
        width,
        strategy,
        segments,
        dropped,
    })
}

/// One segment per series covering all of it. Requires equal lengths and
/// one target per series.
pub fn whole_series(dataset: impl Into<Arc<SequenceDataset>>) -> Result<SegmentSet> {
    let source = dataset.into();
    if matches!(source.schema().target_kind, TargetKind::AlignedSequence(_)) {
        return Err(Error::WrongTargetKind {
            expected: "one target per series (add a segmentation stage)".into(),
            found: source.schema().target_kind.to_string(),
        });
    }
    let width = source.get(0).map_or(0, |i| i.len());
    if let Some(bad) = source.iter().find(|i| i.len() != width) {
        return Err(Error::InvalidParameter(format!(
            "series lengths differ ({width} vs {}); add a segmentation or length stage",
            bad.len()
        )));
    }
    let segments = source
        .iter()
        .enumerate()
        .map(|(parent, inst)| Segment {
            parent,
            start: 0,
            target: resolve(inst.target(), 0, width, TargetStrategy::default()),
        })
        .collect();
    Ok(SegmentSet {
        source,
        width,
        strategy: TargetStrategy::default(),
        segments,
        dropped: Vec::new(),
    })
}
