use std::fs;
use std::path::Path;
use std::time::Instant;

use segpipe::estimators::per_class;
use segpipe::io::{read_ndjson_labeled, write_ndjson, LabeledDataset};
use segpipe::pipeline::StageTiming;
use segpipe::synth::{generate, SynthConfig};
use segpipe::{
    grid_search, split_instances, temporal_k_fold, temporal_split, Exec, Pype, SplitPair,
    TargetKind, Targets,
};

use crate::config::{RunConfig, SplitConfig};
use crate::error::{CliError, CliResult};
use crate::report::{
    BenchReport, BenchTimings, ClassReport, FoldReport, MetricsReport, StageStats, Stats, Timings,
    VERSION,
};

fn load(path: &Path) -> CliResult<LabeledDataset> {
    Ok(read_ndjson_labeled(path)?)
}

fn split(config: &RunConfig, data: &LabeledDataset) -> CliResult<Vec<SplitPair>> {
    let ds = &data.dataset;
    Ok(match config.split {
        SplitConfig::Instance { fraction, seed } => vec![split_instances(ds, fraction, seed)?],
        SplitConfig::Temporal { fraction } => vec![temporal_split(ds, fraction)?],
        SplitConfig::Kfold { k } => temporal_k_fold(ds, k)?.folds,
    })
}

/// Adds `more` into `acc` stage by stage, keeping first-seen order.
fn accumulate(acc: &mut Vec<StageTiming>, more: &[StageTiming]) {
    for t in more {
        match acc.iter_mut().find(|a| a.stage == t.stage) {
            Some(a) => a.seconds += t.seconds,
            None => acc.push(t.clone()),
        }
    }
}

fn concat(parts: Vec<Targets>) -> Option<Targets> {
    let mut iter = parts.into_iter();
    let first = iter.next()?;
    Some(iter.fold(first, |acc, t| match (acc, t) {
        (Targets::Labels(mut a), Targets::Labels(b)) => {
            a.extend(b);
            Targets::Labels(a)
        }
        (Targets::Values(mut a), Targets::Values(b)) => {
            a.extend(b);
            Targets::Values(a)
        }
        (a, _) => a,
    }))
}

/// Split, optional grid search on the training part, fit, score.
pub fn fit_eval(config: &RunConfig) -> CliResult<MetricsReport> {
    let data = load(&config.dataset)?;
    let folds = split(config, &data)?;
    let mut pipeline = config.pipeline()?;

    let grid = match &config.grid {
        Some(grid) => {
            let cv = temporal_k_fold(&folds[0].train, config.cv_folds)?;
            let result = grid_search(&pipeline, grid, &cv)?;
            for (path, value) in &result.best_params {
                pipeline = pipeline.set_param(path, value.clone())?;
            }
            Some(result)
        }
        None => None,
    };

    let start = Instant::now();
    let mut timings = Timings::default();
    let mut fold_reports = Vec::with_capacity(folds.len());
    let mut truth = Vec::new();
    let mut predicted = Vec::new();
    let mut feature_names = Vec::new();
    for fold in &folds {
        let mut model = pipeline.clone_unfitted();
        model.fit(&fold.train)?;
        let eval = model.evaluate(&fold.test)?;
        accumulate(&mut timings.fit, model.fit_timings().unwrap_or_default());
        accumulate(&mut timings.predict, &eval.timings);
        fold_reports.push(FoldReport {
            score: eval.score,
            train_segments: model.n_segments().unwrap_or(0),
            test_segments: eval.predictions.len(),
            dropped_train_series: model.dropped_series().unwrap_or(0),
        });
        feature_names = model.feature_names().unwrap_or_default().to_vec();
        truth.push(eval.truth);
        predicted.push(eval.predictions.targets);
    }
    timings.total_seconds = start.elapsed().as_secs_f64();

    let per_class = match (concat(truth), concat(predicted)) {
        (Some(Targets::Labels(t)), Some(Targets::Labels(p))) => Some(
            per_class(&t, &p)?
                .into_iter()
                .map(|m| ClassReport {
                    label: m.label,
                    name: data
                        .label_names
                        .as_ref()
                        .and_then(|names| names.get(m.label).cloned()),
                    precision: m.precision,
                    recall: m.recall,
                    support: m.support,
                })
                .collect(),
        ),
        _ => None,
    };
    let metric = match data.dataset.schema().target_kind {
        TargetKind::ClassLabel | TargetKind::AlignedSequence(segpipe::ValueKind::Label) => {
            "accuracy"
        }
        _ => "neg_rmse",
    };

    let report = MetricsReport {
        version: VERSION.into(),
        metric: metric.into(),
        score: fold_reports.iter().map(|f| f.score).sum::<f64>() / fold_reports.len() as f64,
        split: config.split.name().into(),
        train_segments: fold_reports.iter().map(|f| f.train_segments).sum(),
        test_segments: fold_reports.iter().map(|f| f.test_segments).sum(),
        folds: fold_reports,
        feature_names,
        per_class,
        label_names: data.label_names,
        timings,
        grid_search: grid,
        config: config.clone(),
    };
    if let Some(out) = &config.output {
        write_json(out, &report)?;
    }
    Ok(report)
}

pub fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult<()> {
    let text = serde_json::to_string_pretty(value).expect("reports serialize");
    fs::write(path, text + "\n").map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Times `repeats` fit/score rounds of the configured pipeline. Loading and
/// splitting happen once, before the clock starts. A grid in the config is
/// not searched.
pub fn bench(config: &RunConfig, repeats: usize, exec: Exec) -> CliResult<BenchReport> {
    if repeats == 0 {
        return Err(CliError::Config("repeats must be ≥ 1".into()));
    }
    let data = load(&config.dataset)?;
    let folds = split(config, &data)?;
    let pipeline = config.pipeline()?.with_exec(exec);
    Ok(BenchReport {
        version: VERSION.into(),
        repeats,
        exec: match exec {
            Exec::Sequential => "sequential".into(),
            Exec::Parallel => "parallel".into(),
        },
        timings: time_folds(&pipeline, &folds, repeats)?,
        config: config.clone(),
    })
}

/// The timed loop of [`bench`].
pub fn time_folds(pipeline: &Pype, folds: &[SplitPair], repeats: usize) -> CliResult<BenchTimings> {
    let mut totals = Vec::with_capacity(repeats);
    let mut per_stage: Vec<(String, Vec<f64>, Vec<f64>)> = Vec::new();
    let mut score = f64::NAN;
    for _ in 0..repeats {
        let mut fit = Vec::new();
        let mut predict = Vec::new();
        let mut scores = Vec::new();
        let start = Instant::now();
        for fold in folds {
            let mut model = pipeline.clone_unfitted();
            model.fit(&fold.train)?;
            let eval = model.evaluate(&fold.test)?;
            scores.push(eval.score);
            accumulate(&mut fit, model.fit_timings().unwrap_or_default());
            accumulate(&mut predict, &eval.timings);
        }
        totals.push(start.elapsed().as_secs_f64());
        score = scores.iter().sum::<f64>() / scores.len() as f64;
        for t in &fit {
            let predict_seconds = predict
                .iter()
                .find(|p| p.stage == t.stage)
                .map_or(0.0, |p| p.seconds);
            match per_stage.iter_mut().find(|(s, _, _)| *s == t.stage) {
                Some((_, f, p)) => {
                    f.push(t.seconds);
                    p.push(predict_seconds);
                }
                None => per_stage.push((t.stage.clone(), vec![t.seconds], vec![predict_seconds])),
            }
        }
    }
    Ok(BenchTimings {
        score,
        total: Stats::of(totals),
        stages: per_stage
            .into_iter()
            .map(|(stage, f, p)| StageStats {
                stage,
                fit: Stats::of(f),
                predict: Stats::of(p),
            })
            .collect(),
    })
}

pub fn generate_file(config: &SynthConfig, out: &Path) -> CliResult<usize> {
    let ds = generate(config)?;
    write_ndjson(&ds, out)?;
    Ok(ds.len())
}

/// Human-readable dataset summary.
pub fn inspect(path: &Path) -> CliResult<String> {
    let data = load(path)?;
    let ds = &data.dataset;
    let schema = ds.schema();
    let mut lengths = ds.lengths();
    lengths.sort_unstable();
    let n = lengths.len();
    let median = if n % 2 == 1 {
        lengths[n / 2] as f64
    } else {
        (lengths[n / 2 - 1] + lengths[n / 2]) as f64 / 2.0
    };
    let histogram = match ds.class_histogram() {
        Ok(h) => h
            .iter()
            .map(|(label, count)| {
                match data
                    .label_names
                    .as_ref()
                    .and_then(|names| names.get(*label))
                {
                    Some(name) => format!("{label} ({name}): {count}"),
                    None => format!("{label}: {count}"),
                }
            })
            .collect::<Vec<_>>()
            .join(", "),
        Err(_) => "n/a".into(),
    };
    Ok(format!(
        "N: {n}\nd: {}\nc: {}\ntarget kind: {}\nT: min {} / median {} / max {}\nclass histogram: {histogram}\n",
        schema.channels,
        schema.context_width,
        schema.target_kind,
        lengths[0],
        median,
        lengths[n - 1],
    ))
}
