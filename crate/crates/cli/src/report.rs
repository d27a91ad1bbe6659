//! JSON reports written by `fit-eval` and `bench`.

use serde::{Deserialize, Serialize};

use segpipe::pipeline::StageTiming;
use segpipe::GridSearchResult;

use crate::config::RunConfig;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassReport {
    pub label: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub precision: f64,
    pub recall: f64,
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldReport {
    pub score: f64,
    pub train_segments: usize,
    pub test_segments: usize,
    pub dropped_train_series: usize,
}

/// Per-stage wall-clock seconds, summed over folds.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Timings {
    pub fit: Vec<StageTiming>,
    pub predict: Vec<StageTiming>,
    pub total_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub version: String,
    /// `accuracy` for classification, `neg_rmse` for regression.
    pub metric: String,
    /// Mean of the fold scores.
    pub score: f64,
    pub split: String,
    pub folds: Vec<FoldReport>,
    /// Totals over folds.
    pub train_segments: usize,
    pub test_segments: usize,
    pub feature_names: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub per_class: Option<Vec<ClassReport>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label_names: Option<Vec<String>>,
    pub timings: Timings,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_search: Option<GridSearchResult>,
    pub config: RunConfig,
}

impl MetricsReport {
    pub fn summary(&self) -> String {
        let value = if self.metric == "neg_rmse" {
            -self.score
        } else {
            self.score
        };
        let name = if self.metric == "neg_rmse" {
            "rmse"
        } else {
            "accuracy"
        };
        format!(
            "{name} {value:.4} on {} test segments ({} train, {} split, {} fold{})",
            self.test_segments,
            self.train_segments,
            self.split,
            self.folds.len(),
            if self.folds.len() == 1 { "" } else { "s" }
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub samples: Vec<f64>,
    pub min: f64,
    pub median: f64,
}

impl Stats {
    pub fn of(samples: Vec<f64>) -> Self {
        let mut sorted = samples.clone();
        sorted.sort_by(f64::total_cmp);
        let n = sorted.len();
        let median = match n {
            0 => f64::NAN,
            _ if n % 2 == 1 => sorted[n / 2],
            _ => 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]),
        };
        Self {
            min: sorted.first().copied().unwrap_or(f64::NAN),
            median,
            samples,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StageStats {
    pub stage: String,
    pub fit: Stats,
    pub predict: Stats,
}

/// Timings of the compute-only region: everything after the data is loaded
/// and split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchTimings {
    /// Score of the last repeat.
    pub score: f64,
    pub total: Stats,
    pub stages: Vec<StageStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub version: String,
    pub repeats: usize,
    pub exec: String,
    #[serde(flatten)]
    pub timings: BenchTimings,
    pub config: RunConfig,
}

impl BenchReport {
    pub fn summary(&self) -> String {
        format!(
            "{} repeats ({}): median {:.4} s, min {:.4} s",
            self.repeats, self.exec, self.timings.total.median, self.timings.total.min
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stats() {
        let s = Stats::of(vec![3.0, 1.0, 2.0, 10.0]);
        assert_eq!((s.min, s.median), (1.0, 2.5));
        assert_eq!(s.samples, vec![3.0, 1.0, 2.0, 10.0]);
        assert_eq!(Stats::of(vec![4.0, 1.0, 9.0]).median, 4.0);
    }
}
