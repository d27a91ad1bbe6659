//! Per-channel statistical feature representation of segments.
//!
//! Each segment becomes one row: every feature function is applied to every
//! channel (channel-major order), followed by the segment's context values.
//! Column names are `ch{j}_{feature}` and `ctx{k}`.

pub mod oracle;

use std::fmt;
use std::sync::Arc;

use ndarray::{Array2, ArrayView1};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::transforms::{SegmentSet, Targets};

/// Built-in scalar statistics. Moments are central and uncorrected; the
/// standard deviation and variance are population forms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BuiltinFeature {
    Mean,
    Median,
    Min,
    Max,
    Std,
    Var,
    /// `m3 / m2^{3/2}`; 0 for a constant channel.
    Skew,
    /// `m4 / m2² − 3`; 0 for a constant channel.
    Kurt,
    /// `Σ x²`.
    AbsEnergy,
    /// Sign changes of `x − mean(x)`; exact zeros are skipped.
    ZeroCrossings,
    /// `Σ |x[k+1] − x[k]|`.
    LineLength,
}

impl BuiltinFeature {
    pub const ALL: [BuiltinFeature; 11] = [
        BuiltinFeature::Mean,
        BuiltinFeature::Median,
        BuiltinFeature::Min,
        BuiltinFeature::Max,
        BuiltinFeature::Std,
        BuiltinFeature::Var,
        BuiltinFeature::Skew,
        BuiltinFeature::Kurt,
        BuiltinFeature::AbsEnergy,
        BuiltinFeature::ZeroCrossings,
        BuiltinFeature::LineLength,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BuiltinFeature::Mean => "mean",
            BuiltinFeature::Median => "median",
            BuiltinFeature::Min => "min",
            BuiltinFeature::Max => "max",
            BuiltinFeature::Std => "std",
            BuiltinFeature::Var => "var",
            BuiltinFeature::Skew => "skew",
            BuiltinFeature::Kurt => "kurt",
            BuiltinFeature::AbsEnergy => "abs_energy",
            BuiltinFeature::ZeroCrossings => "zero_crossings",
            BuiltinFeature::LineLength => "line_length",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|f| f.name() == name)
    }

    fn is_moment_ratio(self) -> bool {
        matches!(self, BuiltinFeature::Skew | BuiltinFeature::Kurt)
    }
}

type CustomFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A named map from one channel of one segment to a scalar.
#[derive(Clone)]
pub enum FeatureFunction {
    Builtin(BuiltinFeature),
    Custom { name: String, eval: CustomFn },
}

impl FeatureFunction {
    pub fn custom(
        name: impl Into<String>,
        eval: impl Fn(&[f64]) -> f64 + Send + Sync + 'static,
    ) -> Self {
        FeatureFunction::Custom {
            name: name.into(),
            eval: Arc::new(eval),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            FeatureFunction::Builtin(b) => b.name(),
            FeatureFunction::Custom { name, .. } => name,
        }
    }

    /// Evaluates the function on its own. Extraction uses a shared
    /// single-pass summary for built-ins instead.
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            FeatureFunction::Builtin(b) => {
                ChannelSummary::compute(x, &mut Vec::new(), *b == BuiltinFeature::Median).get(*b)
            }
            FeatureFunction::Custom { eval, .. } => eval(x),
        }
    }
}

impl fmt::Debug for FeatureFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureFunction::Builtin(b) => write!(f, "Builtin({})", b.name()),
            FeatureFunction::Custom { name, .. } => write!(f, "Custom({name})"),
        }
    }
}

impl PartialEq for FeatureFunction {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (FeatureFunction::Builtin(a), FeatureFunction::Builtin(b)) => a == b,
            (
                FeatureFunction::Custom { name: a, eval: fa },
                FeatureFunction::Custom { name: b, eval: fb },
            ) => a == b && Arc::ptr_eq(fa, fb),
            _ => false,
        }
    }
}

/// Ordered feature functions with unique names.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    functions: Vec<FeatureFunction>,
}

impl FeatureSet {
    pub fn new(functions: Vec<FeatureFunction>) -> Result<Self> {
        for (i, f) in functions.iter().enumerate() {
            if functions[..i].iter().any(|g| g.name() == f.name()) {
                return Err(Error::InvalidParameter(format!(
                    "duplicate feature name `{}`",
                    f.name()
                )));
            }
        }
        Ok(Self { functions })
    }

    /// All built-in features in their canonical order.
    pub fn builtin() -> Self {
        Self {
            functions: BuiltinFeature::ALL
                .into_iter()
                .map(FeatureFunction::Builtin)
                .collect(),
        }
    }

    /// Built-in features by name, in the given order.
    pub fn from_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let functions = names
            .iter()
            .map(|n| {
                BuiltinFeature::from_name(n.as_ref())
                    .map(FeatureFunction::Builtin)
                    .ok_or_else(|| Error::UnknownFeature {
                        name: n.as_ref().to_string(),
                        available: BuiltinFeature::ALL.map(BuiltinFeature::name).join(", "),
                    })
            })
            .collect::<Result<_>>()?;
        Self::new(functions)
    }

    /// Appends a custom function.
    pub fn with(mut self, function: FeatureFunction) -> Result<Self> {
        self.functions.push(function);
        Self::new(self.functions)
    }

    pub fn functions(&self) -> &[FeatureFunction] {
        &self.functions
    }

    pub fn len(&self) -> usize {
        self.functions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.functions.is_empty()
    }

    pub fn names(&self) -> Vec<&str> {
        self.functions.iter().map(FeatureFunction::name).collect()
    }

    fn needs_summary(&self) -> bool {
        self.functions
            .iter()
            .any(|f| matches!(f, FeatureFunction::Builtin(_)))
    }

    fn needs_median(&self) -> bool {
        self.functions
            .iter()
            .any(|f| matches!(f, FeatureFunction::Builtin(BuiltinFeature::Median)))
    }
}

/// Everything the built-ins need, from two passes over the channel plus an
/// optional selection for the median.
#[derive(Debug, Clone, Copy)]
struct ChannelSummary {
    n: f64,
    mean: f64,
    median: f64,
    min: f64,
    max: f64,
    m2: f64,
    m3: f64,
    m4: f64,
    abs_energy: f64,
    zero_crossings: f64,
    line_length: f64,
}

impl ChannelSummary {
    fn compute(x: &[f64], scratch: &mut Vec<f64>, need_median: bool) -> Self {
        let n = x.len();
        let mut sum = 0.0;
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        let mut abs_energy = 0.0;
        let mut line_length = 0.0;
        let mut prev = x.first().copied().unwrap_or(0.0);
        for &v in x {
            sum += v;
            min = min.min(v);
            max = max.max(v);
            abs_energy += v * v;
            line_length += (v - prev).abs();
            prev = v;
        }
        let constant = min == max;
        let mean = if constant { min } else { sum / n as f64 };

        let (mut m2, mut m3, mut m4) = (0.0, 0.0, 0.0);
        let mut crossings = 0usize;
        let mut last_dev = 0.0f64;
        if !constant {
            for &v in x {
                let d = v - mean;
                let d2 = d * d;
                m2 += d2;
                m3 += d2 * d;
                m4 += d2 * d2;
                if d != 0.0 {
                    if last_dev != 0.0 && (d < 0.0) != (last_dev < 0.0) {
                        crossings += 1;
                    }
                    last_dev = d;
                }
            }
        }
        let nf = n as f64;

        let median = if need_median && n > 0 {
            scratch.clear();
            scratch.extend_from_slice(x);
            let mid = n / 2;
            let (lower, &mut upper, _) = scratch.select_nth_unstable_by(mid, f64::total_cmp);
            if n % 2 == 1 {
                upper
            } else {
                let below = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                0.5 * (below + upper)
            }
        } else {
            f64::NAN
        };

        Self {
            n: nf,
            mean,
            median,
            min,
            max,
            m2: m2 / nf,
            m3: m3 / nf,
            m4: m4 / nf,
            abs_energy,
            zero_crossings: crossings as f64,
            line_length,
        }
    }

    fn get(&self, feature: BuiltinFeature) -> f64 {
        if self.n == 0.0 {
            return f64::NAN;
        }
        let constant = self.m2 == 0.0;
        match feature {
            BuiltinFeature::Mean => self.mean,
            BuiltinFeature::Median => self.median,
            BuiltinFeature::Min => self.min,
            BuiltinFeature::Max => self.max,
            BuiltinFeature::Std => self.m2.sqrt(),
            BuiltinFeature::Var => self.m2,
            BuiltinFeature::Skew if constant => 0.0,
            BuiltinFeature::Skew => self.m3 / (self.m2 * self.m2.sqrt()),
            BuiltinFeature::Kurt if constant => 0.0,
            BuiltinFeature::Kurt => self.m4 / (self.m2 * self.m2) - 3.0,
            BuiltinFeature::AbsEnergy => self.abs_energy,
            BuiltinFeature::ZeroCrossings => self.zero_crossings,
            BuiltinFeature::LineLength => self.line_length,
        }
    }
}

/// Feature rows with column names, the resolved targets of the source
/// segments and each row's `(parent, start)` provenance.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub values: Array2<f64>,
    pub names: Vec<String>,
    pub targets: Targets,
    pub provenance: Vec<(usize, usize)>,
}

impl FeatureMatrix {
    pub fn nrows(&self) -> usize {
        self.values.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.values.ncols()
    }

    pub fn row(&self, i: usize) -> ArrayView1<'_, f64> {
        self.values.row(i)
    }
}

/// Column names for `channels` channels, `fs` and `context_width` context values.
pub fn feature_names(channels: usize, fs: &FeatureSet, context_width: usize) -> Vec<String> {
    let mut names = Vec::with_capacity(channels * fs.len() + context_width);
    for j in 0..channels {
        for f in fs.functions() {
            names.push(format!("ch{j}_{}", f.name()));
        }
    }
    names.extend((0..context_width).map(|k| format!("ctx{k}")));
    names
}

pub fn extract(segments: &SegmentSet, fs: &FeatureSet) -> Result<FeatureMatrix> {
    extract_with(segments, fs, Exec::default())
}

pub fn extract_with(segments: &SegmentSet, fs: &FeatureSet, exec: Exec) -> Result<FeatureMatrix> {
    let width = segments.width();
    if width == 0 {
        return Err(Error::WidthTooSmall {
            width,
            feature: fs.names().first().unwrap_or(&"any").to_string(),
        });
    }
    if width < 2 {
        if let Some(f) = fs.functions().iter().find(|f| match f {
            FeatureFunction::Builtin(b) => b.is_moment_ratio(),
            FeatureFunction::Custom { .. } => false,
        }) {
            return Err(Error::WidthTooSmall {
                width,
                feature: f.name().to_string(),
            });
        }
    }
    let d = segments.channels();
    let c = segments.context_width();
    let p = d * fs.len() + c;
    let n = segments.len();
    let summary = fs.needs_summary();
    let median = fs.needs_median();

    let mut values = vec![0.0; n * p];
    exec.for_each_row(&mut values, p, |i, row| {
        let window = segments.window(i);
        let mut channel = Vec::with_capacity(width);
        let mut scratch = Vec::new();
        for j in 0..d {
            channel.clear();
            channel.extend(window.column(j).iter().copied());
            let s = summary.then(|| ChannelSummary::compute(&channel, &mut scratch, median));
            let out = &mut row[j * fs.len()..(j + 1) * fs.len()];
            for (slot, f) in out.iter_mut().zip(fs.functions()) {
                *slot = match (f, &s) {
                    (FeatureFunction::Builtin(b), Some(s)) => s.get(*b),
                    (f, _) => f.eval(&channel),
                };
            }
        }
        if let Some(ctx) = segments.context(i) {
            row[d * fs.len()..].copy_from_slice(ctx);
        }
    });

    Ok(FeatureMatrix {
        values: Array2::from_shape_vec((n, p), values).expect("buffer sized n × p"),
        names: feature_names(d, fs, c),
        targets: segments.targets(),
        provenance: segments.provenance(),
    })
}
