//! Ordered stage chains from raw sequences to a terminal estimator.
//!
//! A [`Pype`] is zero or more dataset transforms, at most one segmenter, one
//! feature stage, zero or more matrix transforms and one estimator, in that
//! order. Segmentation changes the number of samples and their targets, so
//! fitting, prediction and scoring all operate on segments: `N` series become
//! `N_seg` rows, each tagged with its `(parent, start)` provenance.
//!
//! Stage parameters are addressable as `"<stage name>.<param>"` JSON values,
//! which is what grid search and the CLI configuration manipulate.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::Instant;

use indexmap::IndexMap;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use crate::dataset::{Schema, SequenceDataset};
use crate::error::{Error, Result};
use crate::estimators::kernel_ridge::DEFAULT_LAMBDA;
use crate::estimators::{
    accuracy, require_labels, require_values, rmse, FittedModel, KernelRidgeClassifier,
    KernelRidgeRegressor, NearestCentroidModel, OneNearestNeighborModel,
};
use crate::exec::Exec;
use crate::features::{extract_with, FeatureMatrix, FeatureSet};
use crate::transforms::{
    interpolate, pad, segment_with, truncate, whole_series, ScalerState, SegmentParams, SegmentSet,
    TargetStrategy, Targets, TruncateLength,
};

fn default_lambda() -> f64 {
    DEFAULT_LAMBDA
}

/// What a stage does, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum StageSpec {
    Pad {
        length: usize,
        #[serde(default)]
        value: f64,
    },
    Truncate {
        length: TruncateLength,
    },
    Interpolate {
        period: f64,
    },
    Segment {
        width: usize,
        overlap: f64,
        #[serde(default)]
        target: TargetStrategy,
    },
    Features {
        features: Vec<String>,
    },
    StandardScaler,
    /// One-vs-rest RBF kernel ridge classifier.
    Krc {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    /// RBF kernel ridge regressor.
    Krr {
        #[serde(default)]
        gamma: Option<f64>,
        #[serde(default = "default_lambda")]
        lambda: f64,
    },
    NearestCentroid,
    OneNn,
}

/// Position class of a stage in the chain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum StageKind {
    DatasetTransform,
    Segmenter,
    FeatureStage,
    MatrixTransform,
    Estimator,
}

impl StageSpec {
    pub fn kind(&self) -> StageKind {
        match self {
            StageSpec::Pad { .. } | StageSpec::Truncate { .. } | StageSpec::Interpolate { .. } => {
                StageKind::DatasetTransform
            }
            StageSpec::Segment { .. } => StageKind::Segmenter,
            StageSpec::Features { .. } => StageKind::FeatureStage,
            StageSpec::StandardScaler => StageKind::MatrixTransform,
            StageSpec::Krc { .. }
            | StageSpec::Krr { .. }
            | StageSpec::NearestCentroid
            | StageSpec::OneNn => StageKind::Estimator,
        }
    }

    fn apply_dataset(&self, ds: &SequenceDataset) -> Result<SequenceDataset> {
        match self {
            StageSpec::Pad { length, value } => pad(ds, *length, *value),
            StageSpec::Truncate { length } => truncate(ds, *length),
            StageSpec::Interpolate { period } => interpolate(ds, *period),
            _ => unreachable!("not a dataset transform"),
        }
    }

    fn fit_estimator(&self, fm: &FeatureMatrix, exec: Exec) -> Result<FittedModel> {
        let x = fm.values.view();
        Ok(match self {
            StageSpec::Krc { gamma, lambda } => FittedModel::KernelRidgeClassifier(
                KernelRidgeClassifier {
                    gamma: *gamma,
                    lambda: *lambda,
                }
                .fit(x, require_labels(&fm.targets)?, exec)?,
            ),
            StageSpec::Krr { gamma, lambda } => FittedModel::KernelRidgeRegressor(
                KernelRidgeRegressor {
                    gamma: *gamma,
                    lambda: *lambda,
                }
                .fit(x, require_values(&fm.targets)?, exec)?,
            ),
            StageSpec::NearestCentroid => FittedModel::NearestCentroid(NearestCentroidModel::fit(
                x,
                require_labels(&fm.targets)?,
            )?),
            StageSpec::OneNn => {
                FittedModel::OneNearestNeighbor(OneNearestNeighborModel::fit(x, &fm.targets)?)
            }
            _ => unreachable!("not an estimator"),
        })
    }
}

/// A named stage. Serialises as a flat object: `{"name": ..., "kind": ..., params...}`.
#[derive(Debug, Clone, PartialEq)]
pub struct Stage {
    pub name: String,
    pub spec: StageSpec,
}

impl Stage {
    pub fn new(name: impl Into<String>, spec: StageSpec) -> Self {
        Self {
            name: name.into(),
            spec,
        }
    }

    /// Parameter map of the stage spec, without the `kind` tag.
    fn params(&self) -> Map<String, Value> {
        let mut obj = match serde_json::to_value(&self.spec).expect("stage specs serialise") {
            Value::Object(o) => o,
            _ => unreachable!("internally tagged enums serialise to objects"),
        };
        obj.remove("kind");
        obj
    }
}

impl Serialize for Stage {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut obj = Map::new();
        obj.insert("name".into(), Value::String(self.name.clone()));
        let spec = serde_json::to_value(&self.spec).map_err(serde::ser::Error::custom)?;
        if let Value::Object(o) = spec {
            obj.extend(o);
        }
        Value::Object(obj).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Stage {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut obj = Map::<String, Value>::deserialize(d)?;
        let name = match obj.remove("name") {
            Some(Value::String(n)) => n,
            Some(_) => return Err(D::Error::custom("stage `name` must be a string")),
            None => return Err(D::Error::custom("stage is missing `name`")),
        };
        let spec = StageSpec::deserialize(Value::Object(obj))
            .map_err(|e| D::Error::custom(format!("stage `{name}`: {e}")))?;
        Ok(Stage { name, spec })
    }
}

/// Wall-clock time spent in one stage.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
enum StageState {
    Stateless,
    Scaler(ScalerState),
    Model(FittedModel),
}

#[derive(Debug, Clone, PartialEq)]
struct FittedState {
    schema: Schema,
    states: Vec<StageState>,
    feature_names: Vec<String>,
    n_segments: usize,
    dropped_series: usize,
    timings: Vec<StageTiming>,
}

/// One prediction per segment with its `(parent, start)` origin.
#[derive(Debug, Clone, PartialEq)]
pub struct Predictions {
    pub targets: Targets,
    pub provenance: Vec<(usize, usize)>,
}

impl Predictions {
    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }
}

/// Everything computed while scoring a dataset.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub score: f64,
    pub predictions: Predictions,
    pub truth: Targets,
    pub timings: Vec<StageTiming>,
}

/// Majority label per parent series, ties to the lowest label. Not used by
/// [`Pype::score`], which is per segment.
pub fn vote_by_parent(predictions: &Predictions) -> Vec<(usize, usize)> {
    let Some(labels) = predictions.targets.as_labels() else {
        return Vec::new();
    };
    let mut votes: BTreeMap<usize, BTreeMap<usize, usize>> = BTreeMap::new();
    for (&(parent, _), &label) in predictions.provenance.iter().zip(labels) {
        *votes.entry(parent).or_default().entry(label).or_default() += 1;
    }
    votes
        .into_iter()
        .map(|(parent, counts)| {
            let mut best = (0, 0);
            for (label, n) in counts {
                if n > best.1 {
                    best = (label, n);
                }
            }
            (parent, best.0)
        })
        .collect()
}

/// Segment-level score: accuracy for labels, negative RMSE for values.
pub fn score_targets(truth: &Targets, predicted: &Targets) -> Result<f64> {
    match (truth, predicted) {
        (Targets::Labels(t), Targets::Labels(p)) => accuracy(t, p),
        (Targets::Values(t), Targets::Values(p)) => rmse(t, p).map(|e| -e),
        _ => Err(Error::WrongTargetKind {
            expected: "matching resolved targets".into(),
            found: "mismatched or unresolved targets".into(),
        }),
    }
}

enum Mode<'a> {
    Fit(&'a mut Vec<StageState>),
    Apply(&'a [StageState]),
}

/// A pipeline of stages ending in an estimator.
#[derive(Debug, Clone)]
pub struct Pype {
    stages: Vec<Stage>,
    exec: Exec,
    fitted: Option<Arc<FittedState>>,
}

impl PartialEq for Pype {
    fn eq(&self, other: &Self) -> bool {
        self.stages == other.stages && self.fitted == other.fitted
    }
}

impl Pype {
    /// Checks name uniqueness and stage ordering.
    pub fn new(stages: Vec<Stage>) -> Result<Self> {
        for (i, s) in stages.iter().enumerate() {
            if s.name.is_empty() || s.name.contains('.') {
                return Err(Error::InvalidPipeline(format!(
                    "stage name `{}` must be non-empty and contain no `.`",
                    s.name
                )));
            }
            if stages[..i].iter().any(|t| t.name == s.name) {
                return Err(Error::InvalidPipeline(format!(
                    "duplicate stage name `{}`",
                    s.name
                )));
            }
        }
        let kinds: Vec<StageKind> = stages.iter().map(|s| s.spec.kind()).collect();
        if let Some(w) = kinds.windows(2).position(|w| w[1] < w[0]) {
            return Err(Error::InvalidPipeline(format!(
                "stage `{}` ({:?}) cannot follow `{}` ({:?})",
                stages[w + 1].name,
                kinds[w + 1],
                stages[w].name,
                kinds[w]
            )));
        }
        let count = |k| kinds.iter().filter(|&&x| x == k).count();
        if count(StageKind::Segmenter) > 1 {
            return Err(Error::InvalidPipeline("at most one segmenter".into()));
        }
        if count(StageKind::FeatureStage) != 1 {
            return Err(Error::InvalidPipeline(
                "exactly one feature stage is required".into(),
            ));
        }
        if count(StageKind::Estimator) != 1 || kinds.last() != Some(&StageKind::Estimator) {
            return Err(Error::InvalidPipeline(
                "exactly one estimator is required, in last position".into(),
            ));
        }
        Ok(Self {
            stages,
            exec: Exec::default(),
            fitted: None,
        })
    }

    pub fn with_exec(mut self, exec: Exec) -> Self {
        self.exec = exec;
        self
    }

    pub fn exec(&self) -> Exec {
        self.exec
    }

    pub fn stages(&self) -> &[Stage] {
        &self.stages
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted.is_some()
    }

    /// Feature column names seen during the last fit.
    pub fn feature_names(&self) -> Option<&[String]> {
        self.fitted.as_deref().map(|f| f.feature_names.as_slice())
    }

    /// Segment count of the last fit.
    pub fn n_segments(&self) -> Option<usize> {
        self.fitted.as_deref().map(|f| f.n_segments)
    }

    /// Training series that were too short to produce a segment.
    pub fn dropped_series(&self) -> Option<usize> {
        self.fitted.as_deref().map(|f| f.dropped_series)
    }

    pub fn fit_timings(&self) -> Option<&[StageTiming]> {
        self.fitted.as_deref().map(|f| f.timings.as_slice())
    }

    pub fn clone_unfitted(&self) -> Self {
        Self {
            stages: self.stages.clone(),
            exec: self.exec,
            fitted: None,
        }
    }

    /// Every `stage.param` path with its current value, in stage order.
    pub fn get_params(&self) -> IndexMap<String, Value> {
        let mut out = IndexMap::new();
        for stage in &self.stages {
            for (k, v) in stage.params() {
                out.insert(format!("{}.{k}", stage.name), v);
            }
        }
        out
    }

    /// A copy with one parameter replaced and no fitted state.
    pub fn set_param(&self, path: &str, value: Value) -> Result<Self> {
        let unknown = || Error::UnknownParamPath(path.to_string());
        let (stage_name, key) = path.split_once('.').ok_or_else(unknown)?;
        let idx = self
            .stages
            .iter()
            .position(|s| s.name == stage_name)
            .ok_or_else(unknown)?;
        let mut params = self.stages[idx].params();
        match params.get_mut(key) {
            Some(slot) => *slot = value,
            None => return Err(unknown()),
        }
        let tag = serde_json::to_value(&self.stages[idx].spec)
            .ok()
            .and_then(|v| v.get("kind").cloned())
            .expect("stage specs carry a kind tag");
        params.insert("kind".into(), tag);
        let spec = StageSpec::deserialize(Value::Object(params))
            .map_err(|e| Error::InvalidParameter(format!("{path}: {e}")))?;
        let mut stages = self.stages.clone();
        stages[idx].spec = spec;
        Ok(Self {
            stages,
            exec: self.exec,
            fitted: None,
        })
    }

    /// Applies every stage but the estimator.
    fn features(
        &self,
        dataset: &SequenceDataset,
        mut mode: Mode<'_>,
        timings: &mut Vec<StageTiming>,
    ) -> Result<(FeatureMatrix, usize)> {
        let exec = self.exec;
        let mut ds = Arc::new(dataset.clone());
        let mut segments: Option<SegmentSet> = None;
        let mut matrix: Option<FeatureMatrix> = None;
        let mut dropped = 0;
        for (idx, stage) in self.stages.iter().enumerate() {
            let started = Instant::now();
            let in_stage = |e: Error| e.in_stage(&stage.name);
            let state = match &stage.spec {
                StageSpec::Pad { .. }
                | StageSpec::Truncate { .. }
                | StageSpec::Interpolate { .. } => {
                    ds = Arc::new(stage.spec.apply_dataset(&ds).map_err(in_stage)?);
                    StageState::Stateless
                }
                StageSpec::Segment {
                    width,
                    overlap,
                    target,
                } => {
                    let params = SegmentParams {
                        width: *width,
                        overlap: *overlap,
                    };
                    let set =
                        segment_with(Arc::clone(&ds), params, *target, exec).map_err(in_stage)?;
                    dropped = set.dropped_parents().len();
                    segments = Some(set);
                    StageState::Stateless
                }
                StageSpec::Features { features } => {
                    let set = match segments.take() {
                        Some(s) => s,
                        None => whole_series(Arc::clone(&ds)).map_err(in_stage)?,
                    };
                    let fs = FeatureSet::from_names(features).map_err(in_stage)?;
                    matrix = Some(extract_with(&set, &fs, exec).map_err(in_stage)?);
                    StageState::Stateless
                }
                StageSpec::StandardScaler => {
                    let fm = matrix
                        .take()
                        .expect("feature stage precedes matrix transforms");
                    let (fm, state) = match &mut mode {
                        Mode::Fit(_) => {
                            let s = ScalerState::fit(&fm).map_err(in_stage)?;
                            (s.apply(&fm).map_err(in_stage)?, StageState::Scaler(s))
                        }
                        Mode::Apply(states) => match &states[idx] {
                            StageState::Scaler(s) => {
                                (s.apply(&fm).map_err(in_stage)?, StageState::Stateless)
                            }
                            _ => return Err(Error::NotFitted),
                        },
                    };
                    matrix = Some(fm);
                    state
                }
                _ => {
                    let fm = matrix.take().expect("feature stage precedes the estimator");
                    if let Mode::Fit(states) = &mut mode {
                        states.push(StageState::Stateless);
                    }
                    timings.push(StageTiming {
                        stage: stage.name.clone(),
                        seconds: started.elapsed().as_secs_f64(),
                    });
                    return Ok((fm, dropped));
                }
            };
            if let Mode::Fit(states) = &mut mode {
                states.push(state);
            }
            timings.push(StageTiming {
                stage: stage.name.clone(),
                seconds: started.elapsed().as_secs_f64(),
            });
        }
        unreachable!("pipelines end with an estimator")
    }

    fn estimator_index(&self) -> usize {
        self.stages.len() - 1
    }

    /// Fits every stage in order on `dataset`, replacing any previous fit.
    pub fn fit(&mut self, dataset: &SequenceDataset) -> Result<()> {
        self.fitted = None;
        let report = dataset.validate();
        if !report.is_empty() {
            return Err(Error::Invalid(report));
        }
        if dataset.is_empty() {
            return Err(Error::EmptyDataset);
        }
        let mut states = Vec::with_capacity(self.stages.len());
        let mut timings = Vec::with_capacity(self.stages.len());
        let (fm, dropped) = self.features(dataset, Mode::Fit(&mut states), &mut timings)?;

        let est = &self.stages[self.estimator_index()];
        let started = Instant::now();
        let model = est
            .spec
            .fit_estimator(&fm, self.exec)
            .map_err(|e| e.in_stage(&est.name))?;
        let last = timings.last_mut().expect("estimator timing pushed");
        last.seconds += started.elapsed().as_secs_f64();
        *states.last_mut().expect("estimator state pushed") = StageState::Model(model);

        self.fitted = Some(Arc::new(FittedState {
            schema: *dataset.schema(),
            states,
            feature_names: fm.names,
            n_segments: fm.values.nrows(),
            dropped_series: dropped,
            timings,
        }));
        Ok(())
    }

    fn fitted_for(&self, dataset: &SequenceDataset, check_targets: bool) -> Result<&FittedState> {
        let fitted = self.fitted.as_deref().ok_or(Error::NotFitted)?;
        let (a, b) = (&fitted.schema, dataset.schema());
        if a.channels != b.channels {
            return Err(Error::SchemaMismatch(format!(
                "fitted on {} channels, got {}",
                a.channels, b.channels
            )));
        }
        if a.context_width != b.context_width {
            return Err(Error::SchemaMismatch(format!(
                "fitted on context width {}, got {}",
                a.context_width, b.context_width
            )));
        }
        if check_targets && a.target_kind != b.target_kind {
            return Err(Error::SchemaMismatch(format!(
                "fitted on {} targets, got {}",
                a.target_kind, b.target_kind
            )));
        }
        Ok(fitted)
    }

    fn infer(
        &self,
        fitted: &FittedState,
        dataset: &SequenceDataset,
        timings: &mut Vec<StageTiming>,
    ) -> Result<(Predictions, Targets)> {
        let model = match fitted.states.last() {
            Some(StageState::Model(m)) => m,
            _ => return Err(Error::NotFitted),
        };
        if dataset.is_empty() {
            let empty = model.predict(
                ndarray::Array2::zeros((0, fitted.feature_names.len())).view(),
                self.exec,
            )?;
            return Ok((
                Predictions {
                    targets: empty.clone(),
                    provenance: Vec::new(),
                },
                empty,
            ));
        }
        let (fm, _) = self.features(dataset, Mode::Apply(&fitted.states), timings)?;
        let est = &self.stages[self.estimator_index()];
        let started = Instant::now();
        let targets = model
            .predict(fm.values.view(), self.exec)
            .map_err(|e| e.in_stage(&est.name))?;
        if let Some(last) = timings.last_mut() {
            last.seconds += started.elapsed().as_secs_f64();
        }
        Ok((
            Predictions {
                targets,
                provenance: fm.provenance,
            },
            fm.targets,
        ))
    }

    /// One prediction per segment of `dataset`.
    pub fn predict(&self, dataset: &SequenceDataset) -> Result<Predictions> {
        let fitted = self.fitted_for(dataset, false)?;
        Ok(self.infer(fitted, dataset, &mut Vec::new())?.0)
    }

    /// Segment-level accuracy (labels) or negative RMSE (values).
    pub fn score(&self, dataset: &SequenceDataset) -> Result<f64> {
        self.evaluate(dataset).map(|e| e.score)
    }

    /// Score together with predictions, true segment targets and per-stage timings.
    pub fn evaluate(&self, dataset: &SequenceDataset) -> Result<Evaluation> {
        let fitted = self.fitted_for(dataset, true)?;
        let mut timings = Vec::new();
        let (predictions, truth) = self.infer(fitted, dataset, &mut timings)?;
        let score = score_targets(&truth, &predictions.targets)?;
        Ok(Evaluation {
            score,
            predictions,
            truth,
            timings,
        })
    }
}

impl Serialize for Pype {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.stages.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Pype {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let stages = Vec::<Stage>::deserialize(d)?;
        Pype::new(stages).map_err(D::Error::custom)
    }
}
