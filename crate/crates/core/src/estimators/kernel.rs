//! Gaussian (RBF) kernel matrices.

use ndarray::{Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::exec::Exec;

/// `K[i, j] = exp(−γ‖a_i − b_j‖²)`.
pub fn rbf_kernel(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    gamma: f64,
) -> Result<Array2<f64>> {
    rbf_kernel_with(a, b, gamma, Exec::default())
}

pub fn rbf_kernel_with(
    a: ArrayView2<'_, f64>,
    b: ArrayView2<'_, f64>,
    gamma: f64,
    exec: Exec,
) -> Result<Array2<f64>> {
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "RBF gamma must be positive, got {gamma}"
        )));
    }
    if a.ncols() != b.ncols() {
        return Err(Error::DimensionMismatch {
            expected: a.ncols(),
            found: b.ncols(),
        });
    }
    let (n, m, p) = (a.nrows(), b.nrows(), a.ncols());
    if p == 0 {
        return Ok(Array2::ones((n, m)));
    }
    let a = a.as_standard_layout();
    let b = b.as_standard_layout();
    let (a, b) = (
        a.as_slice().expect("standard layout"),
        b.as_slice().expect("standard layout"),
    );
    let mut out = vec![0.0; n * m];
    exec.for_each_row(&mut out, m, |i, row| {
        let ai = &a[i * p..(i + 1) * p];
        for (slot, bj) in row.iter_mut().zip(b.chunks_exact(p)) {
            let d2: f64 = ai.iter().zip(bj).map(|(x, y)| (x - y) * (x - y)).sum();
            *slot = (-gamma * d2).exp();
        }
    });
    Ok(Array2::from_shape_vec((n, m), out).expect("buffer sized n × m"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    #[test]
    fn unit_diagonal_and_symmetry() {
        let x = array![[0.0, 1.0], [2.0, -1.0], [0.5, 0.5]];
        let k = rbf_kernel(x.view(), x.view(), 0.7).unwrap();
        for i in 0..3 {
            assert_eq!(k[[i, i]], 1.0);
            for j in 0..3 {
                assert_eq!(k[[i, j]], k[[j, i]]);
            }
        }
    }

    #[test]
    fn unit_distance() {
        let k = rbf_kernel(array![[0.0, 0.0]].view(), array![[1.0, 0.0]].view(), 1.0).unwrap();
        assert!((k[[0, 0]] - 0.367_879_441_171_442_3).abs() < 1e-15);
    }

    #[test]
    fn small_gamma_tends_to_one() {
        let x = array![[0.0], [3.0], [-5.0]];
        let k = rbf_kernel(x.view(), x.view(), 1e-12).unwrap();
        assert!(k.iter().all(|&v| (v - 1.0).abs() < 1e-9));
    }

    #[test]
    fn errors() {
        let a = array![[0.0, 1.0]];
        let b = array![[0.0]];
        assert!(matches!(
            rbf_kernel(a.view(), b.view(), 1.0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(rbf_kernel(a.view(), a.view(), 0.0).is_err());
    }

    #[test]
    fn parallel_matches_sequential() {
        let x = Array2::from_shape_fn((17, 5), |(i, j)| ((i * 7 + j * 3) % 11) as f64 * 0.3);
        let s = rbf_kernel_with(x.view(), x.view(), 0.2, Exec::Sequential).unwrap();
        let p = rbf_kernel_with(x.view(), x.view(), 0.2, Exec::Parallel).unwrap();
        assert_eq!(s, p);
    }
}
