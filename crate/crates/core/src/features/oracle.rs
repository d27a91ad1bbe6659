//! Deliberately naive reference implementations of the built-in features.
//!
//! Used by tests to cross-check the single-pass extraction path: full sorts
//! for order statistics, one explicit loop per moment, no shared state.

use crate::error::{Error, Result};
use crate::features::BuiltinFeature;

fn mean(x: &[f64]) -> f64 {
    let mut s = 0.0;
    for v in x {
        s += v;
    }
    s / x.len() as f64
}

fn central_moment(x: &[f64], order: i32) -> f64 {
    let m = mean(x);
    let mut s = 0.0;
    for v in x {
        s += (v - m).powi(order);
    }
    s / x.len() as f64
}

fn all_equal(x: &[f64]) -> bool {
    x.iter().all(|&v| v == x[0])
}

/// The named built-in feature of `x`, computed the slow way.
pub fn feature_oracle(x: &[f64], name: &str) -> Result<f64> {
    let feature = BuiltinFeature::from_name(name).ok_or_else(|| Error::UnknownFeature {
        name: name.to_string(),
        available: BuiltinFeature::ALL.map(BuiltinFeature::name).join(", "),
    })?;
    if x.is_empty() {
        return Ok(f64::NAN);
    }
    let constant = all_equal(x);
    Ok(match feature {
        BuiltinFeature::Mean if constant => x[0],
        BuiltinFeature::Mean => mean(x),
        BuiltinFeature::Median => {
            let mut sorted = x.to_vec();
            sorted.sort_by(f64::total_cmp);
            let n = sorted.len();
            if n % 2 == 1 {
                sorted[n / 2]
            } else {
                (sorted[n / 2 - 1] + sorted[n / 2]) / 2.0
            }
        }
        BuiltinFeature::Min => {
            let mut m = x[0];
            for &v in x {
                if v < m {
                    m = v;
                }
            }
            m
        }
        BuiltinFeature::Max => {
            let mut m = x[0];
            for &v in x {
                if v > m {
                    m = v;
                }
            }
            m
        }
        BuiltinFeature::Var | BuiltinFeature::Std if constant => 0.0,
        BuiltinFeature::Var => central_moment(x, 2),
        BuiltinFeature::Std => central_moment(x, 2).sqrt(),
        BuiltinFeature::Skew | BuiltinFeature::Kurt if constant => 0.0,
        BuiltinFeature::Skew => central_moment(x, 3) / central_moment(x, 2).powf(1.5),
        BuiltinFeature::Kurt => central_moment(x, 4) / central_moment(x, 2).powi(2) - 3.0,
        BuiltinFeature::AbsEnergy => {
            let mut s = 0.0;
            for v in x {
                s += v * v;
            }
            s
        }
        BuiltinFeature::ZeroCrossings if constant => 0.0,
        BuiltinFeature::ZeroCrossings => {
            let m = mean(x);
            let signs: Vec<bool> = x
                .iter()
                .map(|v| v - m)
                .filter(|&d| d != 0.0)
                .map(|d| d > 0.0)
                .collect();
            let mut count = 0;
            for k in 1..signs.len() {
                if signs[k] != signs[k - 1] {
                    count += 1;
                }
            }
            count as f64
        }
        BuiltinFeature::LineLength => {
            let mut s = 0.0;
            for k in 1..x.len() {
                s += (x[k] - x[k - 1]).abs();
            }
            s
        }
    })
}
