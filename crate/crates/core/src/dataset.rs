//! Sequence records, datasets and their validation.
//!
//! A [`SequenceInstance`] is one `(t, X, y, context)` record: a `T × d`
//! sample matrix, an optional strictly increasing time vector, an optional
//! static context vector and a target. Targets live inside the instance so
//! that any selection or split of a dataset keeps them paired with their
//! samples.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::Range;

use ndarray::{s, Array2, ArrayView2};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Element type of an aligned target sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValueKind {
    Label,
    Real,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TargetKind {
    /// One class label per sequence.
    ClassLabel,
    /// One real value per sequence.
    ScalarValue,
    /// One target per sample.
    AlignedSequence(ValueKind),
}

impl fmt::Display for TargetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TargetKind::ClassLabel => f.write_str("class label"),
            TargetKind::ScalarValue => f.write_str("scalar value"),
            TargetKind::AlignedSequence(ValueKind::Label) => f.write_str("label sequence"),
            TargetKind::AlignedSequence(ValueKind::Real) => f.write_str("real sequence"),
        }
    }
}

/// A target sequence aligned sample-for-sample with its instance.
#[derive(Debug, Clone, PartialEq)]
pub enum SequenceTarget {
    Labels(Vec<usize>),
    Values(Vec<f64>),
}

impl SequenceTarget {
    pub fn len(&self) -> usize {
        match self {
            SequenceTarget::Labels(v) => v.len(),
            SequenceTarget::Values(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn value_kind(&self) -> ValueKind {
        match self {
            SequenceTarget::Labels(_) => ValueKind::Label,
            SequenceTarget::Values(_) => ValueKind::Real,
        }
    }

    pub(crate) fn slice(&self, range: Range<usize>) -> Self {
        match self {
            SequenceTarget::Labels(v) => SequenceTarget::Labels(v[range].to_vec()),
            SequenceTarget::Values(v) => SequenceTarget::Values(v[range].to_vec()),
        }
    }

    /// Element `i` as a real number.
    pub fn get_f64(&self, i: usize) -> f64 {
        match self {
            SequenceTarget::Labels(v) => v[i] as f64,
            SequenceTarget::Values(v) => v[i],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    Label(usize),
    Scalar(f64),
    Sequence(SequenceTarget),
}

impl Target {
    pub fn kind(&self) -> TargetKind {
        match self {
            Target::Label(_) => TargetKind::ClassLabel,
            Target::Scalar(_) => TargetKind::ScalarValue,
            Target::Sequence(s) => TargetKind::AlignedSequence(s.value_kind()),
        }
    }
}

/// Samples, time, context and target of a decomposed instance.
pub(crate) type InstanceParts = (Array2<f64>, Option<Vec<f64>>, Option<Vec<f64>>, Target);

/// One sequence record. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceInstance {
    samples: Array2<f64>,
    time: Option<Vec<f64>>,
    context: Option<Vec<f64>>,
    target: Target,
}

impl SequenceInstance {
    pub fn new(samples: Array2<f64>, target: Target) -> Self {
        Self {
            samples,
            time: None,
            context: None,
            target,
        }
    }

    /// Builds an instance from row vectors. Rows must share one length.
    pub fn from_rows(rows: &[Vec<f64>], target: Target) -> Result<Self> {
        let d = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.len(),
            });
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        let samples =
            Array2::from_shape_vec((rows.len(), d), flat).expect("row lengths checked above");
        Ok(Self::new(samples, target))
    }

    pub fn with_time(mut self, time: Vec<f64>) -> Self {
        self.time = Some(time);
        self
    }

    pub fn with_context(mut self, context: Vec<f64>) -> Self {
        self.context = Some(context);
        self
    }

    pub fn samples(&self) -> ArrayView2<'_, f64> {
        self.samples.view()
    }

    pub fn time(&self) -> Option<&[f64]> {
        self.time.as_deref()
    }

    pub fn context(&self) -> Option<&[f64]> {
        self.context.as_deref()
    }

    pub fn target(&self) -> &Target {
        &self.target
    }

    /// Number of samples `T`.
    pub fn len(&self) -> usize {
        self.samples.nrows()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn channels(&self) -> usize {
        self.samples.ncols()
    }

    pub fn context_width(&self) -> usize {
        self.context.as_ref().map_or(0, Vec::len)
    }

    /// The sub-record covering samples `range`; time and aligned targets are
    /// cut identically, fixed targets and context are copied.
    pub fn slice(&self, range: Range<usize>) -> Self {
        let target = match &self.target {
            Target::Sequence(seq) => Target::Sequence(seq.slice(range.clone())),
            other => other.clone(),
        };
        Self {
            samples: self.samples.slice(s![range.clone(), ..]).to_owned(),
            time: self.time.as_ref().map(|t| t[range].to_vec()),
            context: self.context.clone(),
            target,
        }
    }

    pub(crate) fn into_parts(self) -> InstanceParts {
        (self.samples, self.time, self.context, self.target)
    }

    pub(crate) fn from_parts(
        samples: Array2<f64>,
        time: Option<Vec<f64>>,
        context: Option<Vec<f64>>,
        target: Target,
    ) -> Self {
        Self {
            samples,
            time,
            context,
            target,
        }
    }

    /// Instance-local invariant checks against `schema`.
    pub fn violations(&self, index: usize, schema: &Schema) -> Vec<Violation> {
        let mut out = Vec::new();
        let mut push = |field: &'static str, message: String| {
            out.push(Violation {
                instance: index,
                field,
                message,
            })
        };
        let t_len = self.len();

        if t_len == 0 {
            push("X", "sequence has no samples".into());
        }
        if self.channels() != schema.channels {
            push(
                "X",
                format!("{} channels, expected {}", self.channels(), schema.channels),
            );
        }
        if let Some((pos, _)) = self
            .samples
            .iter()
            .enumerate()
            .find(|(_, v)| !v.is_finite())
        {
            let d = self.channels().max(1);
            push(
                "X",
                format!("non-finite value at row {} channel {}", pos / d, pos % d),
            );
        }

        if let Some(time) = &self.time {
            if time.len() != t_len {
                push("t", format!("time length {} ≠ T {}", time.len(), t_len));
            }
            if let Some(k) = time.iter().position(|v| !v.is_finite()) {
                push("t", format!("non-finite time at index {k}"));
            } else if let Some(k) = time.windows(2).position(|w| w[1] <= w[0]) {
                push(
                    "t",
                    format!("time not strictly increasing at index {}", k + 1),
                );
            }
        }

        if self.context_width() != schema.context_width {
            push(
                "context",
                format!(
                    "context width {}, expected {}",
                    self.context_width(),
                    schema.context_width
                ),
            );
        }
        if let Some(k) = self
            .context
            .as_ref()
            .and_then(|c| c.iter().position(|v| !v.is_finite()))
        {
            push("context", format!("non-finite context value at index {k}"));
        }

        let kind = self.target.kind();
        if kind != schema.target_kind {
            push(
                "y",
                format!("target kind {kind}, expected {}", schema.target_kind),
            );
        }
        match &self.target {
            Target::Label(label) => {
                if let Some(k) = schema.class_count.filter(|k| label >= k) {
                    push("y", format!("label {label} ≥ class count {k}"));
                }
            }
            Target::Scalar(v) => {
                if !v.is_finite() {
                    push("y", "non-finite target".into());
                }
            }
            Target::Sequence(seq) => {
                if seq.len() != t_len {
                    push("y", format!("target length {} ≠ T {}", seq.len(), t_len));
                }
                match seq {
                    SequenceTarget::Values(v) => {
                        if let Some(k) = v.iter().position(|x| !x.is_finite()) {
                            push("y", format!("non-finite target at index {k}"));
                        }
                    }
                    SequenceTarget::Labels(v) => {
                        if let Some(k) = schema.class_count {
                            if let Some(l) = v.iter().find(|&&l| l >= k) {
                                push("y", format!("label {l} ≥ class count {k}"));
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Shape shared by every instance of a dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schema {
    /// Channel count `d`.
    pub channels: usize,
    /// Context width `c` (0 when instances carry no context).
    pub context_width: usize,
    pub target_kind: TargetKind,
    pub class_count: Option<usize>,
}

impl Schema {
    pub fn of(instance: &SequenceInstance) -> Self {
        Self {
            channels: instance.channels(),
            context_width: instance.context_width(),
            target_kind: instance.target().kind(),
            class_count: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub instance: usize,
    pub field: &'static str,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "instance {} field {}: {}",
            self.instance, self.field, self.message
        )
    }
}

/// Every invariant violation found in a dataset. Empty iff the dataset is valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_empty(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            return f.write_str("no violations");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Ordered, indexable collection of instances sharing one [`Schema`].
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceDataset {
    schema: Schema,
    instances: Vec<SequenceInstance>,
}

impl SequenceDataset {
    /// Builds a dataset without checking invariants; see [`Self::validate`].
    pub fn new_unchecked(schema: Schema, instances: Vec<SequenceInstance>) -> Self {
        Self { schema, instances }
    }

    /// Infers the schema from the first instance and validates everything.
    pub fn from_instances(instances: Vec<SequenceInstance>) -> Result<Self> {
        let schema = Schema::of(instances.first().ok_or(Error::EmptyDataset)?);
        Self::with_schema(schema, instances)
    }

    /// Validated construction against an explicit schema; may be empty.
    pub fn with_schema(schema: Schema, instances: Vec<SequenceInstance>) -> Result<Self> {
        let ds = Self { schema, instances };
        let report = ds.validate();
        if report.is_empty() {
            Ok(ds)
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn empty(schema: Schema) -> Self {
        Self {
            schema,
            instances: Vec::new(),
        }
    }

    /// Declares the number of classes; every label must be below it.
    pub fn with_class_count(mut self, class_count: usize) -> Result<Self> {
        self.schema.class_count = Some(class_count);
        let report = self.validate();
        if report.is_empty() {
            Ok(self)
        } else {
            Err(Error::Invalid(report))
        }
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn instances(&self) -> &[SequenceInstance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn get(&self, index: usize) -> Option<&SequenceInstance> {
        self.instances.get(index)
    }

    pub fn iter(&self) -> std::slice::Iter<'_, SequenceInstance> {
        self.instances.iter()
    }

    /// Sequence lengths `T_i` in instance order.
    pub fn lengths(&self) -> Vec<usize> {
        self.instances.iter().map(SequenceInstance::len).collect()
    }

    pub fn validate(&self) -> ValidationReport {
        ValidationReport {
            violations: self
                .instances
                .iter()
                .enumerate()
                .flat_map(|(i, inst)| inst.violations(i, &self.schema))
                .collect(),
        }
    }

    /// The instances at `indices`, in the given order. The schema is kept.
    pub fn select(&self, indices: &[usize]) -> Result<Self> {
        let len = self.len();
        let instances = indices
            .iter()
            .map(|&index| {
                self.instances
                    .get(index)
                    .cloned()
                    .ok_or(Error::IndexOutOfRange { index, len })
            })
            .collect::<Result<_>>()?;
        Ok(Self {
            schema: self.schema,
            instances,
        })
    }

    /// Label → count over instance-level class labels.
    pub fn class_histogram(&self) -> Result<BTreeMap<usize, usize>> {
        if self.schema.target_kind != TargetKind::ClassLabel {
            return Err(Error::WrongTargetKind {
                expected: TargetKind::ClassLabel.to_string(),
                found: self.schema.target_kind.to_string(),
            });
        }
        let mut hist = BTreeMap::new();
        for inst in &self.instances {
            if let Target::Label(l) = inst.target() {
                *hist.entry(*l).or_insert(0) += 1;
            }
        }
        Ok(hist)
    }

    /// Replaces the instances, keeping the schema. Used by transforms that
    /// cannot change `d`, `c` or the target kind.
    pub(crate) fn map_instances(&self, instances: Vec<SequenceInstance>) -> Self {
        Self {
            schema: self.schema,
            instances,
        }
    }
}

impl<'a> IntoIterator for &'a SequenceDataset {
    type Item = &'a SequenceInstance;
    type IntoIter = std::slice::Iter<'a, SequenceInstance>;

    fn into_iter(self) -> Self::IntoIter {
        self.instances.iter()
    }
}

impl std::ops::Index<usize> for SequenceDataset {
    type Output = SequenceInstance;

    fn index(&self, index: usize) -> &SequenceInstance {
        &self.instances[index]
    }
}
