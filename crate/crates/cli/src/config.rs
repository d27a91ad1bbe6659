//! JSON run configuration.

use std::fs;
use std::path::{Path, PathBuf};

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{Map, Value};

use segpipe::pipeline::{Stage, StageKind};
use segpipe::{Exec, ParamGrid, Pype};

use crate::error::{CliError, CliResult};

pub const DEFAULT_ESTIMATOR_NAME: &str = "estimator";

fn default_cv_folds() -> usize {
    3
}

fn default_fraction() -> f64 {
    0.25
}

/// One fit/evaluate run. Relative paths are resolved against the directory
/// of the config file when it is loaded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub dataset: PathBuf,
    /// Stages before the estimator.
    pub pipeline: Vec<Stage>,
    pub estimator: EstimatorConfig,
    pub split: SplitConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<ParamGrid>,
    /// Temporal folds over the training portion used by grid search.
    #[serde(default = "default_cv_folds")]
    pub cv_folds: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub sequential: bool,
}

/// The terminal stage. `name` defaults to `"estimator"`, which is also the
/// prefix of its grid parameter paths.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConfig(pub Stage);

impl Serialize for EstimatorConfig {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.0.serialize(s)
    }
}

impl<'de> Deserialize<'de> for EstimatorConfig {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let mut obj = Map::<String, Value>::deserialize(d)?;
        obj.entry("name")
            .or_insert_with(|| Value::String(DEFAULT_ESTIMATOR_NAME.into()));
        let stage = Stage::deserialize(Value::Object(obj)).map_err(D::Error::custom)?;
        if stage.spec.kind() != StageKind::Estimator {
            return Err(D::Error::custom(format!(
                "estimator `{}` is not an estimator kind",
                stage.name
            )));
        }
        Ok(Self(stage))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SplitConfig {
    /// Random whole-series split.
    Instance {
        #[serde(default = "default_fraction")]
        fraction: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Every series cut along time; the tail is the test part.
    Temporal {
        #[serde(default = "default_fraction")]
        fraction: f64,
    },
    /// Temporal K-fold; the score is the mean over folds.
    Kfold { k: usize },
}

impl SplitConfig {
    pub fn name(&self) -> &'static str {
        match self {
            SplitConfig::Instance { .. } => "instance",
            SplitConfig::Temporal { .. } => "temporal",
            SplitConfig::Kfold { .. } => "kfold",
        }
    }
}

impl RunConfig {
    /// Reads, parses and checks a config file.
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let mut config: RunConfig = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        config.resolve_paths(base);
        config.check()?;
        Ok(config)
    }

    /// Makes `dataset` and `output` absolute relative to `base`.
    pub fn resolve_paths(&mut self, base: &Path) {
        let base = std::path::absolute(base).unwrap_or_else(|_| base.to_path_buf());
        self.dataset = base.join(&self.dataset);
        self.output = self.output.as_deref().map(|p| base.join(p));
    }

    pub fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    /// The configured pipeline, unfitted.
    pub fn pipeline(&self) -> CliResult<Pype> {
        let mut stages = self.pipeline.clone();
        stages.push(self.estimator.0.clone());
        Pype::new(stages)
            .map(|p| p.with_exec(self.exec()))
            .map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks everything that can be checked without the data.
    pub fn check(&self) -> CliResult<()> {
        let pipeline = self.pipeline()?;
        match self.split {
            SplitConfig::Instance { fraction, .. } | SplitConfig::Temporal { fraction }
                if !(fraction > 0.0 && fraction < 1.0) =>
            {
                return Err(CliError::Config(format!(
                    "split.fraction must lie in (0, 1), got {fraction}"
                )));
            }
            SplitConfig::Kfold { k } if k < 2 => {
                return Err(CliError::Config(format!("split.k must be ≥ 2, got {k}")));
            }
            _ => {}
        }
        if let Some(grid) = &self.grid {
            if matches!(self.split, SplitConfig::Kfold { .. }) {
                return Err(CliError::Config(
                    "grid: needs an instance or temporal split to search on the training part"
                        .into(),
                ));
            }
            if self.cv_folds < 2 {
                return Err(CliError::Config(format!(
                    "cv_folds must be ≥ 2, got {}",
                    self.cv_folds
                )));
            }
            for (path, values) in grid {
                if values.is_empty() {
                    return Err(CliError::Config(format!("grid.{path}: empty value list")));
                }
                for v in values {
                    pipeline
                        .set_param(path, v.clone())
                        .map_err(|e| CliError::Config(format!("grid.{path}: {e}")))?;
                }
            }
        }
        Ok(())
    }
}
