//! Scoring metrics.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn check_lengths(a: usize, b: usize) -> Result<()> {
    if a != b {
        return Err(Error::LengthMismatch { left: a, right: b });
    }
    if a == 0 {
        return Err(Error::Empty);
    }
    Ok(())
}

/// Fraction of positions where `truth` and `predicted` agree.
pub fn accuracy(truth: &[usize], predicted: &[usize]) -> Result<f64> {
    check_lengths(truth.len(), predicted.len())?;
    let hits = truth.iter().zip(predicted).filter(|(a, b)| a == b).count();
    Ok(hits as f64 / truth.len() as f64)
}

/// Root mean squared error.
pub fn rmse(truth: &[f64], predicted: &[f64]) -> Result<f64> {
    check_lengths(truth.len(), predicted.len())?;
    let sse: f64 = truth
        .iter()
        .zip(predicted)
        .map(|(a, b)| (a - b) * (a - b))
        .sum();
    Ok((sse / truth.len() as f64).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassMetrics {
    pub label: usize,
    /// 0 when the class was never predicted.
    pub precision: f64,
    /// 0 when the class never occurs.
    pub recall: f64,
    pub support: usize,
}

/// Precision and recall for every label seen in either vector, in label order.
pub fn per_class(truth: &[usize], predicted: &[usize]) -> Result<Vec<ClassMetrics>> {
    check_lengths(truth.len(), predicted.len())?;
    let mut labels: Vec<usize> = truth.iter().chain(predicted).copied().collect();
    labels.sort_unstable();
    labels.dedup();
    Ok(labels
        .into_iter()
        .map(|label| {
            let tp = truth
                .iter()
                .zip(predicted)
                .filter(|&(&t, &p)| t == label && p == label)
                .count();
            let predicted_pos = predicted.iter().filter(|&&p| p == label).count();
            let support = truth.iter().filter(|&&t| t == label).count();
            let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            ClassMetrics {
                label,
                precision: ratio(tp, predicted_pos),
                recall: ratio(tp, support),
                support,
            }
        })
        .collect())
}
