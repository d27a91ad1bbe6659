//! Distance-based estimators: nearest centroid and 1-nearest-neighbour.

use ndarray::{Array2, ArrayView1, ArrayView2};

use crate::error::{Error, Result};
use crate::transforms::Targets;

fn sq_dist(a: ArrayView1<'_, f64>, b: ArrayView1<'_, f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

fn check_width(expected: usize, x: ArrayView2<'_, f64>) -> Result<()> {
    if x.ncols() != expected {
        return Err(Error::DimensionMismatch {
            expected,
            found: x.ncols(),
        });
    }
    Ok(())
}

/// Per-class mean feature vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestCentroidModel {
    pub classes: Vec<usize>,
    /// One row per entry of `classes`.
    pub centroids: Array2<f64>,
}

impl NearestCentroidModel {
    pub fn fit(x: ArrayView2<'_, f64>, labels: &[usize]) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::Empty);
        }
        if labels.len() != x.nrows() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: labels.len(),
            });
        }
        let mut classes = labels.to_vec();
        classes.sort_unstable();
        classes.dedup();
        let mut centroids = Array2::zeros((classes.len(), x.ncols()));
        let mut counts = vec![0usize; classes.len()];
        for (row, l) in x.rows().into_iter().zip(labels) {
            let k = classes.binary_search(l).expect("label collected above");
            let mut c = centroids.row_mut(k);
            c += &row;
            counts[k] += 1;
        }
        for (mut c, &n) in centroids.rows_mut().into_iter().zip(&counts) {
            c /= n as f64;
        }
        Ok(Self { classes, centroids })
    }

    /// Closest centroid per row; ties go to the lowest class.
    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        check_width(self.centroids.ncols(), x)?;
        Ok(x.rows()
            .into_iter()
            .map(|row| {
                let mut best = (0, f64::INFINITY);
                for (k, c) in self.centroids.rows().into_iter().enumerate() {
                    let d = sq_dist(row, c);
                    if d < best.1 {
                        best = (k, d);
                    }
                }
                self.classes[best.0]
            })
            .collect())
    }
}

/// Memorises the training rows and answers with the nearest one's target.
#[derive(Debug, Clone, PartialEq)]
pub struct OneNearestNeighborModel {
    pub rows: Array2<f64>,
    pub targets: Targets,
}

impl OneNearestNeighborModel {
    pub fn fit(x: ArrayView2<'_, f64>, targets: &Targets) -> Result<Self> {
        if targets.len() != x.nrows() {
            return Err(Error::LengthMismatch {
                left: x.nrows(),
                right: targets.len(),
            });
        }
        if x.nrows() == 0 {
            return Err(Error::Empty);
        }
        if matches!(targets, Targets::Windows(_)) {
            return Err(Error::WrongTargetKind {
                expected: "resolved labels or values".into(),
                found: "target windows".into(),
            });
        }
        Ok(Self {
            rows: x.to_owned(),
            targets: targets.clone(),
        })
    }

    /// Index of the nearest training row for each query; ties go to the
    /// earliest training row.
    pub fn nearest(&self, x: ArrayView2<'_, f64>) -> Result<Vec<usize>> {
        check_width(self.rows.ncols(), x)?;
        Ok(x.rows()
            .into_iter()
            .map(|q| {
                let mut best = (0, f64::INFINITY);
                for (i, r) in self.rows.rows().into_iter().enumerate() {
                    let d = sq_dist(q, r);
                    if d < best.1 {
                        best = (i, d);
                    }
                }
                best.0
            })
            .collect())
    }

    pub fn predict(&self, x: ArrayView2<'_, f64>) -> Result<Targets> {
        Ok(self.targets.select(&self.nearest(x)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn centroid_distance_and_ties() {
        let model = NearestCentroidModel::fit(array![[0.0], [10.0]].view(), &[0, 1]).unwrap();
        assert_eq!(
            model.predict(array![[4.0], [6.0], [5.0]].view()).unwrap(),
            vec![0, 1, 0]
        );
    }

    #[test]
    fn centroid_training_accuracy() {
        let x = array![[0.0, 0.0], [0.5, 0.0], [9.0, 9.0], [9.5, 9.0]];
        let model = NearestCentroidModel::fit(x.view(), &[2, 2, 7, 7]).unwrap();
        assert_eq!(model.centroids.row(0).to_vec(), vec![0.25, 0.0]);
        assert_eq!(model.predict(x.view()).unwrap(), vec![2, 2, 7, 7]);
        let shifted = &x + 100.0;
        let shifted_model = NearestCentroidModel::fit(shifted.view(), &[2, 2, 7, 7]).unwrap();
        let q = array![[3.0, 4.0], [6.0, 5.0]];
        assert_eq!(
            model.predict(q.view()).unwrap(),
            shifted_model.predict((&q + 100.0).view()).unwrap()
        );
    }

    #[test]
    fn one_nn_memorises() {
        let x = array![[0.0, 1.0], [2.0, 3.0], [4.0, 5.0]];
        let t = Targets::Labels(vec![5, 6, 7]);
        let model = OneNearestNeighborModel::fit(x.view(), &t).unwrap();
        assert_eq!(model.predict(x.view()).unwrap(), t);
        let empty = model.predict(Array2::zeros((0, 2)).view()).unwrap();
        assert!(empty.is_empty());
    }

    #[test]
    fn one_nn_duplicate_rows_use_earliest() {
        let x = array![[1.0], [1.0]];
        let model = OneNearestNeighborModel::fit(x.view(), &Targets::Labels(vec![3, 4])).unwrap();
        assert_eq!(
            model.predict(array![[1.0]].view()).unwrap(),
            Targets::Labels(vec![3])
        );
    }
}
