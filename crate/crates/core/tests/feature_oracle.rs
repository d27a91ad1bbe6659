use std::sync::Arc;

use ndarray::Array2;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use segpipe::features::oracle::feature_oracle;
use segpipe::features::{extract, BuiltinFeature, FeatureFunction, FeatureSet};
use segpipe::transforms::{segment_fixed_target, SegmentParams};
use segpipe::{SequenceDataset, SequenceInstance, Target};

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
}

fn random_vector(rng: &mut ChaCha8Rng) -> Vec<f64> {
    let len = rng.random_range(2..=300);
    let scale = 10f64.powi(rng.random_range(-3..=3));
    let offset = rng.random_range(-5.0..5.0) * scale;
    match rng.random_range(0..10) {
        // constant channel
        0 => vec![offset; len],
        // small integers produce ties and exact zeros around the mean
        1 => (0..len).map(|_| rng.random_range(-3..=3) as f64).collect(),
        _ => (0..len)
            .map(|_| offset + scale * rng.random_range(-1.0..1.0))
            .collect(),
    }
}

#[test]
fn builtins_match_oracle_on_1000_vectors() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for case in 0..1000 {
        let x = random_vector(&mut rng);
        for f in BuiltinFeature::ALL {
            let fast = FeatureFunction::Builtin(f).eval(&x);
            let slow = feature_oracle(&x, f.name()).unwrap();
            assert!(
                close(fast, slow, 1e-9),
                "case {case} {}: {fast} vs {slow}",
                f.name()
            );
        }
    }
}

#[test]
fn extraction_matches_oracle_per_cell() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let samples = Array2::from_shape_fn((120, 3), |_| rng.random_range(-2.0..2.0));
    let ds =
        SequenceDataset::from_instances(vec![SequenceInstance::new(samples, Target::Label(0))])
            .unwrap();
    let segments =
        segment_fixed_target(Arc::new(ds), SegmentParams::new(40, 0.25).unwrap()).unwrap();
    let fm = extract(&segments, &FeatureSet::builtin()).unwrap();
    let n_feat = BuiltinFeature::ALL.len();
    for s in 0..segments.len() {
        let window = segments.window(s);
        for j in 0..3 {
            let channel = window.column(j).to_vec();
            for (f, feature) in BuiltinFeature::ALL.iter().enumerate() {
                let want = feature_oracle(&channel, feature.name()).unwrap();
                let got = fm.values[[s, j * n_feat + f]];
                assert!(
                    close(got, want, 1e-9),
                    "segment {s} ch{j} {}",
                    feature.name()
                );
            }
        }
    }
}

const SHIFTED: [BuiltinFeature; 4] = [
    BuiltinFeature::Min,
    BuiltinFeature::Max,
    BuiltinFeature::Median,
    BuiltinFeature::Mean,
];
const SHIFT_INVARIANT: [BuiltinFeature; 6] = [
    BuiltinFeature::Std,
    BuiltinFeature::Var,
    BuiltinFeature::Skew,
    BuiltinFeature::Kurt,
    BuiltinFeature::ZeroCrossings,
    BuiltinFeature::LineLength,
];

fn eval(f: BuiltinFeature, x: &[f64]) -> f64 {
    FeatureFunction::Builtin(f).eval(x)
}

proptest! {
    #[test]
    fn shift_law(x in prop::collection::vec(-10.0f64..10.0, 2..200), a in -100.0f64..100.0) {
        let y: Vec<f64> = x.iter().map(|v| v + a).collect();
        for f in SHIFTED {
            prop_assert!(close(eval(f, &y), eval(f, &x) + a, 1e-9), "{}", f.name());
        }
        for f in SHIFT_INVARIANT {
            let (before, after) = (eval(f, &x), eval(f, &y));
            prop_assert!(close(after, before, 1e-9), "{}: {before} vs {after}", f.name());
        }
    }

    #[test]
    fn scale_law(x in prop::collection::vec(-10.0f64..10.0, 2..200), s in 0.01f64..100.0) {
        let y: Vec<f64> = x.iter().map(|v| v * s).collect();
        for f in [BuiltinFeature::Skew, BuiltinFeature::Kurt] {
            prop_assert!(close(eval(f, &y), eval(f, &x), 1e-9), "{}", f.name());
        }
    }

    #[test]
    fn shape_law(
        n in 1usize..5,
        t in 10usize..60,
        d in 1usize..4,
        c in 0usize..3,
        width in 2usize..10,
        overlap in 0.0f64..0.9,
        n_feat in 1usize..=11,
    ) {
        let instances = (0..n)
            .map(|i| {
                let inst = SequenceInstance::new(
                    Array2::from_shape_fn((t + i, d), |(r, j)| (r * (j + 1)) as f64 % 7.0),
                    Target::Label(i % 2),
                );
                if c > 0 { inst.with_context(vec![i as f64; c]) } else { inst }
            })
            .collect();
        let ds = SequenceDataset::from_instances(instances).unwrap();
        let segments = segment_fixed_target(Arc::new(ds), SegmentParams::new(width, overlap).unwrap()).unwrap();
        let names: Vec<&str> = BuiltinFeature::ALL[..n_feat].iter().map(|f| f.name()).collect();
        let fm = extract(&segments, &FeatureSet::from_names(&names).unwrap()).unwrap();
        prop_assert_eq!(fm.values.dim(), (segments.len(), d * n_feat + c));
        prop_assert_eq!(fm.names.len(), d * n_feat + c);
        prop_assert_eq!(fm.targets.len(), segments.len());
        prop_assert!(fm.values.iter().all(|v| v.is_finite()));
    }
}
