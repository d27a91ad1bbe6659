//! Seeded synthetic classification data: noisy multichannel sinusoids whose
//! frequency and amplitude depend on the class.

use std::f64::consts::PI;

use ndarray::Array2;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::dataset::{SequenceDataset, SequenceInstance, Target};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub instances: usize,
    pub length: usize,
    pub channels: usize,
    pub classes: usize,
    pub noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            instances: 140,
            length: 200,
            channels: 6,
            classes: 7,
            noise: 0.3,
            seed: 0,
        }
    }
}

/// Instance `i` has class `i mod K`. Channel `j` of a class-`k` series is
/// `(1 + k/2) · sin(2π (1 + k) t / T + 2π j / d)` plus Gaussian noise, so
/// class `k` completes `1 + k` cycles per series.
pub fn generate(config: &SynthConfig) -> Result<SequenceDataset> {
    let SynthConfig {
        instances,
        length,
        channels,
        classes,
        noise,
        seed,
    } = *config;
    if instances == 0 || length == 0 || channels == 0 || classes == 0 {
        return Err(Error::InvalidParameter(
            "instances, length, channels and classes must all be positive".into(),
        ));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "noise must be ≥ 0, got {noise}"
        )));
    }
    let normal = Normal::new(0.0, noise)
        .map_err(|e| Error::InvalidParameter(format!("noise {noise}: {e}")))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let out = (0..instances)
        .map(|i| {
            let k = i % classes;
            let freq = (1 + k) as f64;
            let amp = 1.0 + 0.5 * k as f64;
            let samples = Array2::from_shape_fn((length, channels), |(t, j)| {
                let phase = 2.0 * PI * j as f64 / channels as f64;
                amp * (2.0 * PI * freq * t as f64 / length as f64 + phase).sin()
                    + normal.sample(&mut rng)
            });
            SequenceInstance::new(samples, Target::Label(k))
        })
        .collect();
    SequenceDataset::from_instances(out)?.with_class_count(classes)
}
