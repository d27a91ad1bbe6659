//! Dense Cholesky factorisation for the kernel ridge systems.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};

/// Lower-triangular factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky {
    n: usize,
    // row-major, only the lower triangle is meaningful
    l: Vec<f64>,
}

impl Cholesky {
    /// Factors a symmetric positive definite matrix. Only the lower triangle
    /// of `a` is read.
    pub fn factor(a: ArrayView2<'_, f64>) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: a.ncols(),
            });
        }
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let (ri, rj) = (&l[i * n..i * n + j], &l[j * n..j * n + j]);
                let dot: f64 = ri.iter().zip(rj).map(|(x, y)| x * y).sum();
                let v = a[[i, j]] - dot;
                if i == j {
                    if v.is_nan() || v <= 0.0 || v.is_infinite() {
                        return Err(Error::SingularSystem { pivot: i });
                    }
                    l[i * n + i] = v.sqrt();
                } else {
                    l[i * n + j] = v / l[j * n + j];
                }
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solves `A X = B` column by column.
    pub fn solve(&self, b: ArrayView2<'_, f64>) -> Result<Array2<f64>> {
        let n = self.n;
        if b.nrows() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: b.nrows(),
            });
        }
        let mut x = b.to_owned();
        let mut col = vec![0.0; n];
        for k in 0..b.ncols() {
            for i in 0..n {
                col[i] = b[[i, k]];
            }
            // L y = b
            for i in 0..n {
                let row = &self.l[i * n..i * n + i];
                let dot: f64 = row.iter().zip(&col[..i]).map(|(a, y)| a * y).sum();
                col[i] = (col[i] - dot) / self.l[i * n + i];
            }
            // Lᵀ x = y
            for i in (0..n).rev() {
                let mut s = col[i];
                for (j, &cj) in col.iter().enumerate().skip(i + 1) {
                    s -= self.l[j * n + i] * cj;
                }
                col[i] = s / self.l[i * n + i];
            }
            for i in 0..n {
                x[[i, k]] = col[i];
            }
        }
        Ok(x)
    }
}
