//! Column standardisation of feature matrices.

use ndarray::{Array2, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::features::FeatureMatrix;

/// Per-column mean and population standard deviation.
///
/// Constant columns get a scale of 1, so they are centred but not scaled.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalerState {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    pub constant: Vec<bool>,
}

impl ScalerState {
    pub fn fit(features: &FeatureMatrix) -> Result<Self> {
        Self::fit_values(features.values.view())
    }

    pub fn fit_values(values: ArrayView2<'_, f64>) -> Result<Self> {
        let n = values.nrows();
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut means = Vec::with_capacity(values.ncols());
        let mut stds = Vec::with_capacity(values.ncols());
        let mut constant = Vec::with_capacity(values.ncols());
        for col in values.axis_iter(Axis(1)) {
            let first = col[0];
            let is_const = col.iter().all(|&v| v == first);
            let mean = if is_const {
                first
            } else {
                col.sum() / n as f64
            };
            let var = col.iter().map(|&v| (v - mean) * (v - mean)).sum::<f64>() / n as f64;
            means.push(mean);
            stds.push(if is_const || var == 0.0 {
                1.0
            } else {
                var.sqrt()
            });
            constant.push(is_const);
        }
        Ok(Self {
            means,
            stds,
            constant,
        })
    }

    pub fn width(&self) -> usize {
        self.means.len()
    }

    pub fn apply_values(&self, values: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        if values.ncols() != self.width() {
            return Err(Error::DimensionMismatch {
                expected: self.width(),
                found: values.ncols(),
            });
        }
        let mut out = values.to_owned();
        for (j, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let (m, s) = (self.means[j], self.stds[j]);
            col.mapv_inplace(|v| (v - m) / s);
        }
        Ok(out)
    }

    pub fn apply(&self, features: &FeatureMatrix) -> Result<FeatureMatrix> {
        Ok(FeatureMatrix {
            values: self.apply_values(features.values.view())?,
            ..features.clone()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use proptest::prelude::*;

    #[test]
    fn two_point_column() {
        let x = array![[1.0], [3.0]];
        let s = ScalerState::fit_values(x.view()).unwrap();
        assert_eq!(s.means, vec![2.0]);
        assert_eq!(s.stds, vec![1.0]);
        assert_eq!(s.apply_values(x.view()).unwrap(), array![[-1.0], [1.0]]);
    }

    #[test]
    fn constant_column_is_centred_only() {
        let x = array![[5.0, 0.1], [5.0, 0.1], [5.0, 0.1]];
        let s = ScalerState::fit_values(x.view()).unwrap();
        assert_eq!(s.constant, vec![true, true]);
        let out = s.apply_values(x.view()).unwrap();
        assert!(out.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn dimension_mismatch() {
        let s = ScalerState::fit_values(array![[1.0, 2.0]].view()).unwrap();
        assert!(matches!(
            s.apply_values(array![[1.0]].view()),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 1
            })
        ));
        assert!(ScalerState::fit_values(Array2::<f64>::zeros((0, 2)).view()).is_err());
    }

    proptest! {
        #[test]
        fn standardised_columns(rows in 2usize..40, cols in 1usize..6, seed in any::<u64>()) {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let x = Array2::from_shape_fn((rows, cols), |_| rng.random_range(-50.0..50.0));
            let s = ScalerState::fit_values(x.view()).unwrap();
            let z = s.apply_values(x.view()).unwrap();
            for col in z.axis_iter(Axis(1)) {
                let mean = col.sum() / rows as f64;
                let std = (col.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / rows as f64).sqrt();
                prop_assert!(mean.abs() < 1e-9);
                prop_assert!((std - 1.0).abs() < 1e-9);
            }
        }
    }
}
