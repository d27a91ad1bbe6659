//! Padding, truncation and resampling onto a regular time grid.

use ndarray::Array2;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};

use crate::dataset::{SequenceDataset, SequenceInstance, SequenceTarget, Target};
use crate::error::{Error, Result};

/// Appends rows of `value` to every series shorter than `length`.
///
/// Aligned targets are extended with their final element. Series that carry
/// a time vector cannot be padded.
pub fn pad(dataset: &SequenceDataset, length: usize, value: f64) -> Result<SequenceDataset> {
    let mut out = Vec::with_capacity(dataset.len());
    for (i, inst) in dataset.iter().enumerate() {
        let t = inst.len();
        if t >= length {
            out.push(inst.clone());
            continue;
        }
        if inst.time().is_some() {
            return Err(Error::TimePaddingUnsupported { instance: i });
        }
        let (samples, time, context, target) = inst.clone().into_parts();
        let mut padded = Array2::from_elem((length, samples.ncols()), value);
        padded.slice_mut(ndarray::s![..t, ..]).assign(&samples);
        let target = match target {
            Target::Sequence(SequenceTarget::Labels(mut v)) => {
                let last = *v.last().expect("validated series are non-empty");
                v.resize(length, last);
                Target::Sequence(SequenceTarget::Labels(v))
            }
            Target::Sequence(SequenceTarget::Values(mut v)) => {
                let last = *v.last().expect("validated series are non-empty");
                v.resize(length, last);
                Target::Sequence(SequenceTarget::Values(v))
            }
            other => other,
        };
        out.push(SequenceInstance::from_parts(padded, time, context, target));
    }
    Ok(dataset.map_instances(out))
}

/// Target length of [`truncate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TruncateLength {
    Samples(usize),
    /// The shortest series length in the dataset being transformed.
    MinAcrossDataset,
}

impl Serialize for TruncateLength {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            TruncateLength::Samples(n) => s.serialize_u64(*n as u64),
            TruncateLength::MinAcrossDataset => s.serialize_str("min"),
        }
    }
}

impl<'de> Deserialize<'de> for TruncateLength {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Samples(usize),
            Keyword(String),
        }
        match Raw::deserialize(d)? {
            Raw::Samples(n) => Ok(TruncateLength::Samples(n)),
            Raw::Keyword(k) if k == "min" => Ok(TruncateLength::MinAcrossDataset),
            Raw::Keyword(k) => Err(de::Error::custom(format!(
                "expected a sample count or \"min\", got \"{k}\""
            ))),
        }
    }
}

/// Keeps the first `min(T_i, length)` samples of every series.
pub fn truncate(dataset: &SequenceDataset, length: TruncateLength) -> Result<SequenceDataset> {
    let length = match length {
        TruncateLength::Samples(0) => {
            return Err(Error::InvalidParameter(
                "truncation length must be ≥ 1".into(),
            ))
        }
        TruncateLength::Samples(n) => n,
        TruncateLength::MinAcrossDataset => match dataset.lengths().into_iter().min() {
            Some(n) => n,
            None => return Ok(dataset.clone()),
        },
    };
    let out = dataset
        .iter()
        .map(|inst| {
            if inst.len() <= length {
                inst.clone()
            } else {
                inst.slice(0..length)
            }
        })
        .collect();
    Ok(dataset.map_instances(out))
}

/// Number of grid points `t0 + k·period` not beyond `t_last`. A relative
/// slack of 1e-9 periods absorbs rounding in the grid arithmetic.
fn grid_len(t0: f64, t_last: f64, period: f64) -> usize {
    ((t_last - t0) / period + 1e-9).floor() as usize + 1
}

/// Index of the last sample time `≤ g`, scanning forward from `from`.
fn locate(time: &[f64], g: f64, from: usize) -> usize {
    let mut j = from;
    while j + 1 < time.len() && time[j + 1] <= g {
        j += 1;
    }
    j
}

fn lerp(time: &[f64], values: impl Fn(usize) -> f64, j: usize, g: f64) -> f64 {
    if j + 1 >= time.len() || time[j] == g {
        return values(j);
    }
    let frac = (g - time[j]) / (time[j + 1] - time[j]);
    let (a, b) = (values(j), values(j + 1));
    a + frac * (b - a)
}

/// Linearly resamples every series onto `t0, t0 + period, …`, stopping at
/// the last grid point not after the final timestamp.
///
/// Real-valued aligned targets are interpolated the same way; label
/// sequences take the nearest sample (the earlier one on ties).
pub fn interpolate(dataset: &SequenceDataset, period: f64) -> Result<SequenceDataset> {
    if !(period > 0.0 && period.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "interpolation period must be positive, got {period}"
        )));
    }
    let mut out = Vec::with_capacity(dataset.len());
    for (i, inst) in dataset.iter().enumerate() {
        let time = inst
            .time()
            .ok_or(Error::MissingTimeVector { instance: i })?;
        if time.len() < 2 {
            return Err(Error::DegenerateSeries {
                instance: i,
                len: time.len(),
                min: 2,
            });
        }
        let t0 = time[0];
        let n = grid_len(t0, time[time.len() - 1], period);
        let grid: Vec<f64> = (0..n).map(|k| t0 + k as f64 * period).collect();
        let mut anchors = Vec::with_capacity(n);
        let mut j = 0;
        for &g in &grid {
            j = locate(time, g, j);
            anchors.push(j);
        }

        let samples = inst.samples();
        let d = samples.ncols();
        let mut resampled = Array2::zeros((n, d));
        for (k, (&g, &j)) in grid.iter().zip(&anchors).enumerate() {
            for c in 0..d {
                resampled[[k, c]] = lerp(time, |r| samples[[r, c]], j, g);
            }
        }

        let target = match inst.target() {
            Target::Sequence(SequenceTarget::Values(v)) => {
                Target::Sequence(SequenceTarget::Values(
                    grid.iter()
                        .zip(&anchors)
                        .map(|(&g, &j)| lerp(time, |r| v[r], j, g))
                        .collect(),
                ))
            }
            Target::Sequence(SequenceTarget::Labels(v)) => {
                Target::Sequence(SequenceTarget::Labels(
                    grid.iter()
                        .zip(&anchors)
                        .map(|(&g, &j)| {
                            if j + 1 < time.len() && time[j + 1] - g < g - time[j] {
                                v[j + 1]
                            } else {
                                v[j]
                            }
                        })
                        .collect(),
                ))
            }
            other => other.clone(),
        };
        let context = inst.context().map(<[f64]>::to_vec);
        out.push(SequenceInstance::from_parts(
            resampled,
            Some(grid),
            context,
            target,
        ));
    }
    Ok(dataset.map_instances(out))
}
