//! Terminal estimators consuming feature matrices.

pub mod kernel;
pub mod kernel_ridge;
pub mod metrics;
pub mod neighbors;

use ndarray::ArrayView2;

pub use kernel::{rbf_kernel, rbf_kernel_with};
pub use kernel_ridge::{
    KernelRidgeClassifier, KernelRidgeModel, KernelRidgeRegressionModel, KernelRidgeRegressor,
};
pub use metrics::{accuracy, per_class, rmse, ClassMetrics};
pub use neighbors::{NearestCentroidModel, OneNearestNeighborModel};

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::transforms::Targets;

/// A fitted terminal estimator.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    KernelRidgeClassifier(KernelRidgeModel),
    KernelRidgeRegressor(KernelRidgeRegressionModel),
    NearestCentroid(NearestCentroidModel),
    OneNearestNeighbor(OneNearestNeighborModel),
}

impl FittedModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>, exec: Exec) -> Result<Targets> {
        if x.nrows() == 0 {
            return Ok(match self {
                FittedModel::KernelRidgeRegressor(_) => Targets::Values(Vec::new()),
                FittedModel::OneNearestNeighbor(m) => m.targets.select(&[]),
                _ => Targets::Labels(Vec::new()),
            });
        }
        match self {
            FittedModel::KernelRidgeClassifier(m) => m.predict(x, exec).map(Targets::Labels),
            FittedModel::KernelRidgeRegressor(m) => m.predict(x, exec).map(Targets::Values),
            FittedModel::NearestCentroid(m) => m.predict(x).map(Targets::Labels),
            FittedModel::OneNearestNeighbor(m) => m.predict(x),
        }
    }
}

pub(crate) fn require_labels(targets: &Targets) -> Result<&[usize]> {
    targets.as_labels().ok_or_else(|| Error::WrongTargetKind {
        expected: "class label".into(),
        found: target_desc(targets).into(),
    })
}

pub(crate) fn require_values(targets: &Targets) -> Result<&[f64]> {
    targets.as_values().ok_or_else(|| Error::WrongTargetKind {
        expected: "real value".into(),
        found: target_desc(targets).into(),
    })
}

fn target_desc(t: &Targets) -> &'static str {
    match t {
        Targets::Labels(_) => "class label",
        Targets::Values(_) => "real value",
        Targets::Windows(_) => "target window",
    }
}
