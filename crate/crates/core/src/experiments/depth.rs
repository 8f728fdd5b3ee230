use alloc::vec::Vec;

use super::checkerboard::CheckerboardDataset;
use super::train::{split_for_seed, train_gd, SeedOutcome, TrainConfig, TrainData, TrainResult};
use crate::error::Result;
use crate::numerics::{mean_and_variance, median};

/// Seed of run `index` under a master seed.
pub fn run_seed(master: u64, index: usize) -> u64 {
    master.wrapping_add(index as u64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSummary {
    pub mean: f64,
    /// Unbiased sample variance; 0 for a single run.
    pub variance: f64,
}

impl MetricSummary {
    fn of(xs: &[f64]) -> Self {
        if xs.is_empty() {
            return MetricSummary {
                mean: f64::NAN,
                variance: f64::NAN,
            };
        }
        let (mean, variance) = mean_and_variance(xs);
        MetricSummary { mean, variance }
    }
}

/// Per-depth statistics over seeds of the lr-reduced results.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthSummary {
    pub depth: usize,
    pub width: usize,
    pub actual_params: usize,
    /// Best run of every seed, diverged ones included.
    pub runs: Vec<TrainResult>,
    pub train_loss: MetricSummary,
    pub train_acc: MetricSummary,
    pub test_loss: MetricSummary,
    pub test_acc: MetricSummary,
    pub diverged_seeds: usize,
}

impl DepthSummary {
    fn converged(&self) -> impl Iterator<Item = &TrainResult> {
        self.runs.iter().filter(|r| !r.diverged)
    }

    pub fn median_train_acc(&self) -> f64 {
        let accs: Vec<f64> = self.converged().map(|r| r.best_train_acc).collect();
        if accs.is_empty() {
            f64::NAN
        } else {
            median(&accs)
        }
    }

    pub fn max_train_acc(&self) -> f64 {
        self.converged().map(|r| r.best_train_acc).fold(f64::NAN, f64::max)
    }
}

/// Mean and variance of the four metrics over the seeds that did not diverge.
pub fn aggregate(runs: Vec<TrainResult>) -> Option<DepthSummary> {
    let first = runs.first()?;
    let (depth, width, actual_params) = (first.depth, first.width, first.actual_params);
    let ok: Vec<&TrainResult> = runs.iter().filter(|r| !r.diverged).collect();
    let metric = |f: fn(&TrainResult) -> f64| MetricSummary::of(&ok.iter().map(|r| f(r)).collect::<Vec<_>>());
    Some(DepthSummary {
        depth,
        width,
        actual_params,
        train_loss: metric(|r| r.best_train_loss),
        train_acc: metric(|r| r.best_train_acc),
        test_loss: metric(|r| r.test_loss_at_best),
        test_acc: metric(|r| r.test_acc_at_best),
        diverged_seeds: runs.len() - ok.len(),
        runs,
    })
}

/// Trains every depth for `cfg.seeds` seeds (`run_seed(master, 0..)`) and
/// aggregates per depth. Runs sequentially; each (depth, seed) cell is
/// independent, so callers wanting parallelism can drive [`train_gd`] directly.
pub fn depth_sweep_train(
    template: &TrainConfig,
    depths: &[usize],
    ds: &CheckerboardDataset,
    master: u64,
) -> Result<Vec<DepthSummary>> {
    let data: Vec<(u64, TrainData)> = (0..template.seeds)
        .map(|s| {
            let seed = run_seed(master, s);
            Ok((seed, TrainData::new(ds, &split_for_seed(ds, seed)?)?))
        })
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(depths.len());
    for &depth in depths {
        let cfg = template.clone().with_depth(depth);
        let runs = data
            .iter()
            .map(|(seed, d)| train_gd(&cfg, d, *seed).map(|o: SeedOutcome| o.best))
            .collect::<Result<Vec<_>>>()?;
        out.extend(aggregate(runs));
    }
    Ok(out)
}
