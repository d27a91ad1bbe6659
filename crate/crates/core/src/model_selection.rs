//! Instance-wise and temporal splitting, temporal K-fold and exhaustive
//! grid search over pipeline parameters.
//!
//! Temporal splits cut every series along its time axis, so training
//! samples precede test samples within each series. This breaks the
//! independence of train and test data; it is meant for cases such as the
//! analysis of a single long series.

use std::ops::Range;

use indexmap::IndexMap;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dataset::SequenceDataset;
use crate::error::{Error, Result};
use crate::pipeline::Pype;

/// Where a split instance came from: samples `start..end` of parent `parent`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Origin {
    pub parent: usize,
    pub start: usize,
    pub end: usize,
}

impl Origin {
    pub fn range(&self) -> Range<usize> {
        self.start..self.end
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SplitPair {
    pub train: SequenceDataset,
    pub test: SequenceDataset,
    /// One entry per train instance.
    pub train_origin: Vec<Origin>,
    /// One entry per test instance.
    pub test_origin: Vec<Origin>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FoldPlan {
    pub folds: Vec<SplitPair>,
}

impl FoldPlan {
    /// Wraps prepared folds; needs at least two, each with a non-empty test set.
    pub fn new(folds: Vec<SplitPair>) -> Result<Self> {
        if folds.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "a fold plan needs at least 2 folds, got {}",
                folds.len()
            )));
        }
        if let Some(i) = folds.iter().position(|f| f.test.is_empty()) {
            return Err(Error::InvalidParameter(format!(
                "fold {i} has an empty test set"
            )));
        }
        Ok(Self { folds })
    }

    pub fn k(&self) -> usize {
        self.folds.len()
    }
}

fn check_fraction(f: f64) -> Result<()> {
    if f > 0.0 && f < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFraction(f))
    }
}

fn whole(ds: &SequenceDataset, indices: &[usize]) -> Vec<Origin> {
    indices
        .iter()
        .map(|&parent| Origin {
            parent,
            start: 0,
            end: ds[parent].len(),
        })
        .collect()
}

/// Seeded random partition of whole instances. The test side gets
/// `round(N · test_fraction)` instances, clamped to `[1, N − 1]`; both sides
/// keep the original instance order.
pub fn split_instances(
    dataset: &SequenceDataset,
    test_fraction: f64,
    seed: u64,
) -> Result<SplitPair> {
    check_fraction(test_fraction)?;
    let n = dataset.len();
    if n < 2 {
        return Err(Error::TooFewInstances(n));
    }
    let n_test = ((n as f64 * test_fraction).round() as usize).clamp(1, n - 1);
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let mut test_idx = order[..n_test].to_vec();
    let mut train_idx = order[n_test..].to_vec();
    test_idx.sort_unstable();
    train_idx.sort_unstable();
    Ok(SplitPair {
        train: dataset.select(&train_idx)?,
        test: dataset.select(&test_idx)?,
        train_origin: whole(dataset, &train_idx),
        test_origin: whole(dataset, &test_idx),
    })
}

/// Cuts every series at `T − ⌊T · test_fraction⌋`: the head trains, the
/// tail tests.
pub fn temporal_split(dataset: &SequenceDataset, test_fraction: f64) -> Result<SplitPair> {
    check_fraction(test_fraction)?;
    let mut train = Vec::with_capacity(dataset.len());
    let mut test = Vec::with_capacity(dataset.len());
    let mut train_origin = Vec::with_capacity(dataset.len());
    let mut test_origin = Vec::with_capacity(dataset.len());
    for (parent, inst) in dataset.iter().enumerate() {
        let len = inst.len();
        let n_test = (len as f64 * test_fraction).floor() as usize;
        if n_test == 0 || n_test >= len {
            return Err(Error::DegenerateCut {
                instance: parent,
                len,
            });
        }
        let cut = len - n_test;
        train.push(inst.slice(0..cut));
        test.push(inst.slice(cut..len));
        train_origin.push(Origin {
            parent,
            start: 0,
            end: cut,
        });
        test_origin.push(Origin {
            parent,
            start: cut,
            end: len,
        });
    }
    Ok(SplitPair {
        train: dataset.map_instances(train),
        test: dataset.map_instances(test),
        train_origin,
        test_origin,
    })
}

/// Contiguous block boundaries of `len` samples in `k` blocks; the first
/// `len mod k` blocks are one sample longer.
fn blocks(len: usize, k: usize) -> Vec<Range<usize>> {
    let (base, extra) = (len / k, len % k);
    let mut out = Vec::with_capacity(k);
    let mut start = 0;
    for j in 0..k {
        let size = base + usize::from(j < extra);
        out.push(start..start + size);
        start += size;
    }
    out
}

/// Temporal K-fold: fold `j` tests on block `j` of every series and trains
/// on the remaining blocks. The runs before and after a removed interior
/// block become two separate train instances; they are never stitched.
pub fn temporal_k_fold(dataset: &SequenceDataset, k: usize) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidParameter(format!("k must be ≥ 2, got {k}")));
    }
    if let Some((instance, inst)) = dataset.iter().enumerate().find(|(_, i)| i.len() < k) {
        return Err(Error::SeriesTooShort {
            instance,
            len: inst.len(),
            k,
        });
    }
    let per_series: Vec<Vec<Range<usize>>> = dataset.iter().map(|i| blocks(i.len(), k)).collect();
    let folds = (0..k)
        .map(|j| {
            let mut train = Vec::new();
            let mut test = Vec::new();
            let mut train_origin = Vec::new();
            let mut test_origin = Vec::new();
            for (parent, (inst, b)) in dataset.iter().zip(&per_series).enumerate() {
                let held = b[j].clone();
                for run in [0..held.start, held.end..inst.len()] {
                    if !run.is_empty() {
                        train.push(inst.slice(run.clone()));
                        train_origin.push(Origin {
                            parent,
                            start: run.start,
                            end: run.end,
                        });
                    }
                }
                test.push(inst.slice(held.clone()));
                test_origin.push(Origin {
                    parent,
                    start: held.start,
                    end: held.end,
                });
            }
            SplitPair {
                train: dataset.map_instances(train),
                test: dataset.map_instances(test),
                train_origin,
                test_origin,
            }
        })
        .collect();
    FoldPlan::new(folds)
}

/// Parameter path → candidate values. Keys keep insertion order, which
/// fixes the product order: the last key varies fastest.
pub type ParamGrid = IndexMap<String, Vec<Value>>;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub params: IndexMap<String, Value>,
    /// NaN when any fold failed.
    pub mean_score: f64,
    pub fold_scores: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSearchResult {
    pub best_params: IndexMap<String, Value>,
    pub best_score: f64,
    pub best_index: usize,
    /// One row per combination, in product order.
    pub table: Vec<GridRow>,
}

/// Every combination of `grid` in product order.
pub fn combinations(grid: &ParamGrid) -> Result<Vec<IndexMap<String, Value>>> {
    if let Some((k, _)) = grid.iter().find(|(_, v)| v.is_empty()) {
        return Err(Error::InvalidParameter(format!(
            "grid entry `{k}` has no values"
        )));
    }
    let sizes: Vec<usize> = grid.values().map(Vec::len).collect();
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut counter = vec![0usize; sizes.len()];
    for _ in 0..total {
        out.push(
            grid.iter()
                .zip(&counter)
                .map(|((k, values), &i)| (k.clone(), values[i].clone()))
                .collect(),
        );
        for pos in (0..counter.len()).rev() {
            counter[pos] += 1;
            if counter[pos] < sizes[pos] {
                break;
            }
            counter[pos] = 0;
        }
    }
    Ok(out)
}

/// Fits a fresh clone of `pipeline` per combination and fold, scores it on
/// the fold's test set and averages over folds. The best combination has
/// the highest finite mean; ties go to the earliest in product order. A
/// fold whose fit or score fails scores NaN and disqualifies its row.
pub fn grid_search(
    pipeline: &Pype,
    grid: &ParamGrid,
    folds: &FoldPlan,
) -> Result<GridSearchResult> {
    let combos = combinations(grid)?;
    let candidates = combos
        .iter()
        .map(|params| {
            params
                .iter()
                .try_fold(pipeline.clone_unfitted(), |p, (path, v)| {
                    p.set_param(path, v.clone())
                })
        })
        .collect::<Result<Vec<_>>>()?;

    let k = folds.k();
    let scores = pipeline.exec().map_range(candidates.len() * k, |job| {
        let (c, f) = (job / k, job % k);
        let fold = &folds.folds[f];
        let mut model = candidates[c].clone();
        model
            .fit(&fold.train)
            .and_then(|_| model.score(&fold.test))
            .unwrap_or(f64::NAN)
    });

    let table: Vec<GridRow> = combos
        .into_iter()
        .zip(scores.chunks(k))
        .map(|(params, fold_scores)| GridRow {
            params,
            mean_score: fold_scores.iter().sum::<f64>() / k as f64,
            fold_scores: fold_scores.to_vec(),
        })
        .collect();

    let mut best: Option<usize> = None;
    for (i, row) in table.iter().enumerate() {
        if row.mean_score.is_finite() && best.is_none_or(|b| row.mean_score > table[b].mean_score) {
            best = Some(i);
        }
    }
    let best_index = best.ok_or(Error::NoValidCombination)?;
    Ok(GridSearchResult {
        best_params: table[best_index].params.clone(),
        best_score: table[best_index].mean_score,
        best_index,
        table,
    })
}
