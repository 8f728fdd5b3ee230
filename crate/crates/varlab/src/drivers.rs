//! Parallel versions of the core experiment loops.
//!
//! Work is split into independent cells, each with its own child random
//! stream, and results are collected in a fixed order, so the output does
//! not depend on the number of threads.

use anyhow::{anyhow, Result};
use rayon::prelude::*;
use varlab_core::analysis::{
    four_sigma, preserve_probability_closed, preserve_probability_mc, seeded_depth_sweep, MatrixSweepRecord,
    SweepSpec,
};
use varlab_core::experiments::{
    aggregate, initial_params, reduce_over_lr, run_seed, split_for_seed, train_cell, CheckerboardDataset,
    DepthSummary, TrainConfig, TrainData, TrainResult,
};
use varlab_core::variability::{aggregate_v3, landscape_sample, v3_sample_at, Grid2D, Landscape, V3Config, V3Point};
use varlab_core::{Activation, Init, Rng};

/// Thread pool with `jobs` workers, or rayon's default when `None`.
pub fn pool(jobs: Option<usize>) -> Result<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        b = b.num_threads(j);
    }
    b.build().map_err(|e| anyhow!("thread pool: {e}"))
}

/// [`varlab_core::variability::v3_measure`] with samples evaluated in parallel.
pub fn v3_sweep(cfg: &V3Config, depths: &[usize], rng: &Rng) -> Result<Vec<V3Point>> {
    cfg.validate()?;
    let cells: Vec<(usize, usize)> = depths
        .iter()
        .flat_map(|&l| (0..cfg.num_samples).map(move |s| (l, s)))
        .collect();
    let values = cells
        .par_iter()
        .map(|&(l, s)| v3_sample_at(cfg, l, rng, s))
        .collect::<Result<Vec<f64>, _>>()?;
    depths
        .iter()
        .zip(values.chunks(cfg.num_samples))
        .map(|(&l, chunk)| Ok(aggregate_v3(cfg, l, chunk)?))
        .collect()
}

/// [`varlab_core::variability::landscape_suite`] with samples in parallel.
pub fn landscapes(
    depth: usize,
    budget: usize,
    activation: Activation,
    init: &Init,
    grid: &Grid2D,
    samples: usize,
    rng: &Rng,
) -> Result<Vec<Landscape>> {
    Ok((0..samples)
        .into_par_iter()
        .map(|s| landscape_sample(depth, budget, activation, init, grid, rng, s))
        .collect::<Result<Vec<_>, _>>()?)
}

/// One seeded depth sweep per spec.
pub fn matrix_sweeps(specs: &[SweepSpec]) -> Result<Vec<Vec<MatrixSweepRecord>>> {
    Ok(specs.par_iter().map(seeded_depth_sweep).collect::<Result<Vec<_>, _>>()?)
}

/// One row of the distance-preservation check.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbRow {
    pub p: f64,
    pub d: usize,
    pub activation: Activation,
    pub closed: f64,
    pub mc: f64,
    pub abs_err: f64,
    pub four_sigma: f64,
}

impl ProbRow {
    pub fn pass(&self) -> bool {
        self.abs_err <= self.four_sigma
    }
}

/// Closed form against Monte Carlo for every `(p, d, activation)`; cell `k`
/// in that order draws from `Rng::new(seed).child(k)`.
pub fn probcheck(ps: &[f64], ds: &[usize], activations: &[Activation], trials: usize, seed: u64) -> Result<Vec<ProbRow>> {
    let cells: Vec<(f64, usize, Activation)> = ps
        .iter()
        .flat_map(|&p| ds.iter().flat_map(move |&d| activations.iter().map(move |&a| (p, d, a))))
        .collect();
    let root = Rng::new(seed);
    Ok(cells
        .par_iter()
        .enumerate()
        .map(|(k, &(p, d, a))| {
            let closed = preserve_probability_closed(p, d, a)?;
            let mc = preserve_probability_mc(p, d, a, trials, &mut root.child(k as u64))?;
            Ok(ProbRow {
                p,
                d,
                activation: a,
                closed,
                mc,
                abs_err: (mc - closed).abs(),
                four_sigma: four_sigma(closed, trials),
            })
        })
        .collect::<Result<Vec<_>, varlab_core::Error>>()?)
}

/// Every (depth, seed, lr) run plus the per-depth aggregation.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainSweep {
    /// Ordered by depth, then seed, then learning rate.
    pub cells: Vec<TrainResult>,
    /// Best learning rate per (depth, seed), same order.
    pub best: Vec<TrainResult>,
    pub summaries: Vec<DepthSummary>,
}

/// [`varlab_core::experiments::depth_sweep_train`] with all cells in parallel.
pub fn train_sweep(template: &TrainConfig, depths: &[usize], ds: &CheckerboardDataset, master: u64) -> Result<TrainSweep> {
    for &l in depths {
        template.clone().with_depth(l).validate()?;
    }
    let seeds: Vec<u64> = (0..template.seeds).map(|s| run_seed(master, s)).collect();
    let data = seeds
        .iter()
        .map(|&seed| Ok(TrainData::new(ds, &split_for_seed(ds, seed)?)?))
        .collect::<Result<Vec<_>>>()?;
    let n_lr = template.lr_grid.len();
    let cells: Vec<(usize, usize, f64)> = depths
        .iter()
        .flat_map(|&l| (0..seeds.len()).flat_map(move |s| template.lr_grid.iter().map(move |&lr| (l, s, lr))))
        .collect();
    let results = cells
        .par_iter()
        .map(|&(l, s, lr)| {
            let cfg = template.clone().with_depth(l);
            let plan = cfg.validate()?;
            let start = initial_params(&cfg, &plan, seeds[s])?;
            train_cell(&cfg, &data[s], start, seeds[s], lr)
        })
        .collect::<Result<Vec<_>, _>>()?;
    let best: Vec<TrainResult> = results
        .chunks(n_lr)
        .map(|runs| reduce_over_lr(runs).expect("non-empty lr grid"))
        .collect();
    let summaries = best
        .chunks(seeds.len())
        .filter_map(|runs| aggregate(runs.to_vec()))
        .collect();
    Ok(TrainSweep {
        cells: results,
        best,
        summaries,
    })
}
