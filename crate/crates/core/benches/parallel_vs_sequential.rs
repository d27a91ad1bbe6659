use std::hint::black_box;
use std::sync::Arc;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use segpipe::estimators::rbf_kernel_with;
use segpipe::features::{extract_with, FeatureSet};
use segpipe::pipeline::{Stage, StageSpec};
use segpipe::synth::{generate, SynthConfig};
use segpipe::transforms::{segment_with, SegmentParams, TruncateLength};
use segpipe::{split_instances, Exec, Pype, TargetStrategy};

const MODES: [(&str, Exec); 2] = [
    ("sequential", Exec::Sequential),
    ("parallel", Exec::Parallel),
];

fn features() -> FeatureSet {
    FeatureSet::from_names(&["median", "min", "max", "std", "skew"]).unwrap()
}

fn stages(c: &mut Criterion) {
    let ds = Arc::new(generate(&SynthConfig::default()).unwrap());
    let params = SegmentParams::new(100, 0.5).unwrap();
    let fs = features();

    let mut group = c.benchmark_group("segment");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| segment_with(Arc::clone(&ds), params, TargetStrategy::Last, exec).unwrap())
        });
    }
    group.finish();

    let small = SegmentParams::new(50, 0.5).unwrap();
    let segments = segment_with(
        Arc::clone(&ds),
        small,
        TargetStrategy::Last,
        Exec::Sequential,
    )
    .unwrap();
    let mut group = c.benchmark_group("extract");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| extract_with(black_box(&segments), &fs, exec).unwrap())
        });
    }
    group.finish();

    let x = extract_with(&segments, &fs, Exec::Sequential)
        .unwrap()
        .values;
    let mut group = c.benchmark_group("rbf_kernel");
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::new(name, x.nrows()), &x, |b, x| {
            b.iter(|| rbf_kernel_with(x.view(), x.view(), 1.0 / 30.0, exec).unwrap())
        });
    }
    group.finish();
}

fn end_to_end(c: &mut Criterion) {
    let ds = generate(&SynthConfig::default()).unwrap();
    let split = split_instances(&ds, 0.25, 0).unwrap();
    let pipeline = Pype::new(vec![
        Stage::new(
            "trunc",
            StageSpec::Truncate {
                length: TruncateLength::Samples(200),
            },
        ),
        Stage::new(
            "seg",
            StageSpec::Segment {
                width: 100,
                overlap: 0.5,
                target: TargetStrategy::Last,
            },
        ),
        Stage::new(
            "feat",
            StageSpec::Features {
                features: ["median", "min", "max", "std", "skew"]
                    .map(String::from)
                    .to_vec(),
            },
        ),
        Stage::new("scale", StageSpec::StandardScaler),
        Stage::new(
            "est",
            StageSpec::Krc {
                gamma: Some(1.0 / 30.0),
                lambda: 1e-3,
            },
        ),
    ])
    .unwrap();

    let mut group = c.benchmark_group("fit_score");
    for (name, exec) in MODES {
        group.bench_function(name, |b| {
            b.iter(|| {
                let mut p = pipeline.clone_unfitted().with_exec(exec);
                p.fit(&split.train).unwrap();
                p.score(&split.test).unwrap()
            })
        });
    }
    group.finish();
}

criterion_group!(benches, stages, end_to_end);
criterion_main!(benches);
