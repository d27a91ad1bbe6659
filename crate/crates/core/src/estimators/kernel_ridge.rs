//! Kernel ridge regression with an RBF kernel, as a one-vs-rest classifier
//! and as a regressor.
//!
//! Dual weights solve `(K + λI) A = Y` where `K` is the training kernel
//! matrix and `Y` holds one-hot class indicators (classifier) or centred
//! targets (regressor).

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::estimators::kernel::rbf_kernel_with;
use crate::exec::Exec;
use crate::linalg::Cholesky;

/// Default ridge strength.
pub const DEFAULT_LAMBDA: f64 = 1e-3;

fn resolve_gamma(gamma: Option<f64>, p: usize) -> Result<f64> {
    let g = gamma.unwrap_or(1.0 / p.max(1) as f64);
    if g > 0.0 && g.is_finite() {
        Ok(g)
    } else {
        Err(Error::InvalidParameter(format!(
            "gamma must be positive, got {g}"
        )))
    }
}

fn check_lambda(lambda: f64) -> Result<()> {
    if lambda > 0.0 && lambda.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "lambda must be positive, got {lambda}"
        )))
    }
}

fn solve_dual(
    x: ArrayView2<'_, f64>,
    rhs: ArrayView2<'_, f64>,
    gamma: f64,
    lambda: f64,
    exec: Exec,
) -> Result<Array2<f64>> {
    let mut k = rbf_kernel_with(x, x, gamma, exec)?;
    for i in 0..k.nrows() {
        k[[i, i]] += lambda;
    }
    Cholesky::factor(k.view())?.solve(rhs)
}

/// Hyperparameters of the one-vs-rest kernel ridge classifier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRidgeClassifier {
    /// RBF width; `None` means `1 / p`.
    pub gamma: Option<f64>,
    pub lambda: f64,
}

impl Default for KernelRidgeClassifier {
    fn default() -> Self {
        Self {
            gamma: None,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRidgeModel {
    pub support: Array2<f64>,
    /// `n × K`, one column per entry of `classes`.
    pub dual_weights: Array2<f64>,
    pub gamma: f64,
    pub lambda: f64,
    /// Sorted distinct training labels.
    pub classes: Vec<usize>,
}

impl KernelRidgeClassifier {
    pub fn fit(
        &self,
        x: ArrayView2<'_, f64>,
        labels: &[usize],
        exec: Exec,
    ) -> Result<KernelRidgeModel> {
        check_lambda(self.lambda)?;
        if x.nrows() == 0 {
            return Err(Error::Empty);
        }
        if labels.len() != x.nrows() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: labels.len(),
            });
        }
        let gamma = resolve_gamma(self.gamma, x.ncols())?;
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let mut onehot = Array2::zeros((labels.len(), classes.len()));
        for (i, l) in labels.iter().enumerate() {
            let k = classes.binary_search(l).expect("label collected above");
            onehot[[i, k]] = 1.0;
        }
        let dual_weights = solve_dual(x, onehot.view(), gamma, self.lambda, exec)?;
        Ok(KernelRidgeModel {
            support: x.to_owned(),
            dual_weights,
            gamma,
            lambda: self.lambda,
            classes,
        })
    }
}

impl KernelRidgeModel {
    /// Per-class scores, `m × K`.
    pub fn decision_function(&self, x: ArrayView2<'_, f64>, exec: Exec) -> Result<Array2<f64>> {
        let k = rbf_kernel_with(x, self.support.view(), self.gamma, exec)?;
        Ok(k.dot(&self.dual_weights))
    }

    /// Highest-scoring class per row; ties go to the lowest class.
    pub fn predict(&self, x: ArrayView2<'_, f64>, exec: Exec) -> Result<Vec<usize>> {
        let scores = self.decision_function(x, exec)?;
        Ok(scores
            .rows()
            .into_iter()
            .map(|row| {
                let mut best = 0;
                for (k, &s) in row.iter().enumerate() {
                    if s > row[best] {
                        best = k;
                    }
                }
                self.classes[best]
            })
            .collect())
    }
}

/// Kernel ridge regressor. Targets are centred before the solve and the
/// mean is added back at prediction time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelRidgeRegressor {
    pub gamma: Option<f64>,
    pub lambda: f64,
}

impl Default for KernelRidgeRegressor {
    fn default() -> Self {
        Self {
            gamma: None,
            lambda: DEFAULT_LAMBDA,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KernelRidgeRegressionModel {
    pub support: Array2<f64>,
    pub dual_weights: Vec<f64>,
    pub offset: f64,
    pub gamma: f64,
    pub lambda: f64,
}

impl KernelRidgeRegressor {
    pub fn fit(
        &self,
        x: ArrayView2<'_, f64>,
        y: &[f64],
        exec: Exec,
    ) -> Result<KernelRidgeRegressionModel> {
        check_lambda(self.lambda)?;
        if x.nrows() == 0 {
            return Err(Error::Empty);
        }
        if y.len() != x.nrows() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: y.len(),
            });
        }
        let gamma = resolve_gamma(self.gamma, x.ncols())?;
        let offset = y.iter().sum::<f64>() / y.len() as f64;
        let rhs = Array2::from_shape_fn((y.len(), 1), |(i, _)| y[i] - offset);
        let a = solve_dual(x, rhs.view(), gamma, self.lambda, exec)?;
        Ok(KernelRidgeRegressionModel {
            support: x.to_owned(),
            dual_weights: a.column(0).to_vec(),
            offset,
            gamma,
            lambda: self.lambda,
        })
    }
}

impl KernelRidgeRegressionModel {
    pub fn predict(&self, x: ArrayView2<'_, f64>, exec: Exec) -> Result<Vec<f64>> {
        let k = rbf_kernel_with(x, self.support.view(), self.gamma, exec)?;
        Ok(k.rows()
            .into_iter()
            .map(|row| {
                self.offset
                    + row
                        .iter()
                        .zip(&self.dual_weights)
                        .map(|(a, b)| a * b)
                        .sum::<f64>()
            })
            .collect())
    }
}
