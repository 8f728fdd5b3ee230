use alloc::vec::Vec;

use super::budget::{width_for_depth, WidthPlan};
use super::checkerboard::{split_dataset, CheckerboardDataset, Split, TRAIN_FRACTION};
use crate::error::{invalid, Error, Result};
use crate::network::{
    batch_loss, init_params, loss_and_gradient_batch, predict_batch, Activation, Init, InitScheme,
    IoDims, NetworkConfig, ParameterSet,
};
use crate::numerics::{Matrix, Rng};

/// The ten initial learning rates tried per run.
pub const FULL_LR_GRID: [f64; 10] = [0.001, 0.003, 0.006, 0.01, 0.03, 0.06, 0.1, 0.3, 0.6, 1.0];
/// Learning rates of the desk-scale protocol.
pub const REDUCED_LR_GRID: [f64; 3] = [0.01, 0.1, 0.3];
pub const FULL_ITERATIONS: usize = 40_000;
pub const REDUCED_ITERATIONS: usize = 10_000;
/// Decay points as fractions of the run (20000, 28000, 36000 of 40000).
pub const DECAY_FRACTIONS: [f64; 3] = [0.5, 0.7, 0.9];
pub const DECAY_FACTOR: f64 = 5.0;

/// Step-size schedule: `base / factor^k` after the `k`-th juncture.
#[derive(Debug, Clone, PartialEq)]
pub struct LrSchedule {
    pub base: f64,
    pub factor: f64,
    pub junctures: Vec<usize>,
}

impl LrSchedule {
    pub fn constant(base: f64) -> Self {
        LrSchedule {
            base,
            factor: 1.0,
            junctures: Vec::new(),
        }
    }

    /// Rate used for the update taken at iteration `t` (0-based).
    pub fn rate_at(&self, t: usize) -> f64 {
        let k = self.junctures.iter().filter(|&&j| t >= j).count();
        self.base / libm::pow(self.factor, k as f64)
    }
}

/// Something gradient descent can minimize.
pub trait Objective {
    type Point: Clone;
    fn loss_and_gradient(&self, at: &Self::Point) -> Result<(f64, Self::Point)>;
    /// `at <- at - lr * gradient`.
    fn step(&self, at: &mut Self::Point, gradient: &Self::Point, lr: f64);
}

#[derive(Debug, Clone, PartialEq)]
pub struct DescentOutcome<P> {
    /// Iterate with the lowest loss seen, wherever it occurred.
    pub best: P,
    pub best_loss: f64,
    pub best_iteration: usize,
    pub diverged: bool,
    /// `(iteration, loss)` every `history_every` iterations.
    pub history: Vec<(usize, f64)>,
}

/// Full-batch gradient descent for `iterations` updates without early stopping.
///
/// The loss is evaluated at iterates `0..=iterations`; a non-finite loss marks
/// the run as diverged and ends it.
pub fn descend<O: Objective>(
    objective: &O,
    start: O::Point,
    schedule: &LrSchedule,
    iterations: usize,
    history_every: usize,
) -> Result<DescentOutcome<O::Point>> {
    let mut point = start;
    let mut best = point.clone();
    let mut best_loss = f64::INFINITY;
    let mut best_iteration = 0;
    let mut history = Vec::new();
    let mut diverged = false;
    for t in 0..=iterations {
        let (loss, grad) = objective.loss_and_gradient(&point)?;
        if history_every > 0 && (t % history_every == 0 || t == iterations) {
            history.push((t, loss));
        }
        if !loss.is_finite() {
            diverged = true;
            break;
        }
        if loss < best_loss {
            best_loss = loss;
            best_iteration = t;
            best.clone_from(&point);
        }
        if t == iterations {
            break;
        }
        objective.step(&mut point, &grad, schedule.rate_at(t));
    }
    Ok(DescentOutcome {
        best,
        best_loss,
        best_iteration,
        diverged,
        history,
    })
}

/// How the learning rate relates to the summed least-squares loss.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepScale {
    /// Step along the gradient of the summed loss.
    Sum,
    /// Step along the gradient of the loss divided by the number of samples.
    Mean,
}

/// Least-squares objective of an extended network on column-stored data.
#[derive(Debug, Clone)]
pub struct NetworkObjective<'a> {
    pub inputs: &'a Matrix,
    pub targets: &'a Matrix,
    pub scale: StepScale,
}

impl Objective for NetworkObjective<'_> {
    type Point = ParameterSet;

    fn loss_and_gradient(&self, at: &ParameterSet) -> Result<(f64, ParameterSet)> {
        loss_and_gradient_batch(at, self.inputs, self.targets)
    }

    fn step(&self, at: &mut ParameterSet, gradient: &ParameterSet, lr: f64) {
        let eff = match self.scale {
            StepScale::Sum => lr,
            StepScale::Mean => lr / self.inputs.cols() as f64,
        };
        at.axpy(-eff, gradient).expect("gradient has the parameter shape");
    }
}

/// Training protocol for one depth under a parameter budget.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub budget: usize,
    pub depth: usize,
    pub activation: Activation,
    pub init: Init,
    pub iterations: usize,
    pub lr_grid: Vec<f64>,
    pub decay_factor: f64,
    pub decay_at: Vec<usize>,
    pub seeds: usize,
    pub step_scale: StepScale,
    /// Loss-curve sampling interval; 0 disables the history.
    pub history_every: usize,
}

impl TrainConfig {
    /// 40000 iterations, the ten-rate grid, 10 seeds, ReLU with Kaiming
    /// weights and zero initial biases, mean-gradient steps.
    pub fn full(budget: usize, depth: usize) -> Self {
        TrainConfig {
            budget,
            depth,
            activation: Activation::Relu,
            init: Init::new(InitScheme::Kaiming).with_bias_sigma(0.0),
            iterations: FULL_ITERATIONS,
            lr_grid: FULL_LR_GRID.to_vec(),
            decay_factor: DECAY_FACTOR,
            decay_at: scaled_junctures(FULL_ITERATIONS),
            seeds: 10,
            step_scale: StepScale::Mean,
            history_every: 0,
        }
    }

    /// Desk-scale protocol: 10000 iterations, rates {0.01, 0.1, 0.3}, 3 seeds.
    pub fn reduced(budget: usize, depth: usize) -> Self {
        TrainConfig {
            iterations: REDUCED_ITERATIONS,
            lr_grid: REDUCED_LR_GRID.to_vec(),
            decay_at: scaled_junctures(REDUCED_ITERATIONS),
            seeds: 3,
            ..TrainConfig::full(budget, depth)
        }
    }

    /// Changes the run length and rescales the decay points proportionally.
    pub fn with_iterations(mut self, iterations: usize) -> Self {
        self.iterations = iterations;
        self.decay_at = scaled_junctures(iterations);
        self
    }

    pub fn with_depth(mut self, depth: usize) -> Self {
        self.depth = depth;
        self
    }

    pub fn validate(&self) -> Result<WidthPlan> {
        if self.lr_grid.is_empty() || self.lr_grid.iter().any(|&lr| !(lr > 0.0 && lr.is_finite())) {
            return Err(invalid("learning rates must be positive and finite"));
        }
        if self.seeds == 0 {
            return Err(invalid("at least one seed is required"));
        }
        if !(self.decay_factor >= 1.0) {
            return Err(invalid("decay factor must be at least 1"));
        }
        if self.decay_at.windows(2).any(|w| w[0] >= w[1]) || self.decay_at.iter().any(|&j| j >= self.iterations) {
            return Err(invalid("decay junctures must increase strictly and precede the last iteration"));
        }
        width_for_depth(self.budget, self.depth)
    }

    pub fn schedule(&self, lr: f64) -> LrSchedule {
        LrSchedule {
            base: lr,
            factor: self.decay_factor,
            junctures: self.decay_at.clone(),
        }
    }
}

/// Decay points at 50%, 70% and 90% of the run, dropping any that would not
/// precede the last iteration.
pub fn scaled_junctures(iterations: usize) -> Vec<usize> {
    let mut out: Vec<usize> = DECAY_FRACTIONS
        .iter()
        .map(|f| libm::round(f * iterations as f64) as usize)
        .filter(|&j| j > 0 && j < iterations)
        .collect();
    out.dedup();
    out
}

/// Loss and accuracy of a network on a subset of the checkerboard.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evaluation {
    pub loss: f64,
    pub accuracy: f64,
}

/// Target vector for a binary label: `(0, 0)` or `(1, 1)`.
pub fn label_target(label: u8) -> [f64; 2] {
    let v = f64::from(label);
    [v, v]
}

/// Predicted label: 1 iff the mean of the two outputs is at least 1/2.
pub fn classify(out0: f64, out1: f64) -> u8 {
    u8::from(0.5 * (out0 + out1) >= 0.5)
}

/// Inputs (`2 x n`), targets (`2 x n`) and labels for the given indices.
pub fn gather(ds: &CheckerboardDataset, indices: &[usize]) -> Result<(Matrix, Matrix, Vec<u8>)> {
    if indices.is_empty() {
        return Err(Error::Empty("index set"));
    }
    let n = indices.len();
    let mut x = Matrix::zeros(2, n);
    let mut y = Matrix::zeros(2, n);
    let mut labels = Vec::with_capacity(n);
    for (col, &k) in indices.iter().enumerate() {
        let p = ds.points.get(k).ok_or_else(|| invalid("index out of range"))?;
        let t = label_target(ds.labels[k]);
        for r in 0..2 {
            x.set(r, col, p[r]);
            y.set(r, col, t[r]);
        }
        labels.push(ds.labels[k]);
    }
    Ok((x, y, labels))
}

fn score(params: &ParameterSet, inputs: &Matrix, targets: &Matrix, labels: &[u8]) -> Result<Evaluation> {
    let out = predict_batch(params, inputs)?;
    let loss = batch_loss(&out, targets);
    let correct = labels
        .iter()
        .enumerate()
        .filter(|&(j, &l)| classify(out.get(0, j), out.get(1, j)) == l)
        .count();
    Ok(Evaluation {
        loss,
        accuracy: correct as f64 / labels.len() as f64,
    })
}

/// Sum of squared errors and classification accuracy on `indices`.
pub fn evaluate(params: &ParameterSet, ds: &CheckerboardDataset, indices: &[usize]) -> Result<Evaluation> {
    check_plane_net(params)?;
    let (x, y, labels) = gather(ds, indices)?;
    score(params, &x, &y, &labels)
}

fn check_plane_net(params: &ParameterSet) -> Result<()> {
    if params.config.io != Some(IoDims::PLANE) {
        return Err(invalid("checkerboard networks need 2-dimensional input and output layers"));
    }
    Ok(())
}

/// Train and test sets packed for repeated use.
#[derive(Debug, Clone)]
pub struct TrainData {
    pub train_x: Matrix,
    pub train_y: Matrix,
    pub train_labels: Vec<u8>,
    pub test_x: Matrix,
    pub test_y: Matrix,
    pub test_labels: Vec<u8>,
}

impl TrainData {
    pub fn new(ds: &CheckerboardDataset, split: &Split) -> Result<Self> {
        let (train_x, train_y, train_labels) = gather(ds, &split.train)?;
        let (test_x, test_y, test_labels) = gather(ds, &split.test)?;
        Ok(TrainData {
            train_x,
            train_y,
            train_labels,
            test_x,
            test_y,
            test_labels,
        })
    }
}

/// Outcome of one (depth, seed, learning rate) cell, or of a seed after
/// reduction over learning rates.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainResult {
    pub depth: usize,
    pub width: usize,
    pub actual_params: usize,
    pub seed: u64,
    pub lr_used: f64,
    pub best_train_loss: f64,
    pub best_train_acc: f64,
    pub test_loss_at_best: f64,
    pub test_acc_at_best: f64,
    pub best_iteration: usize,
    pub diverged: bool,
    pub history: Vec<(usize, f64)>,
}

/// Initial parameters of a run: the extended network for the planned width,
/// drawn from stream `child(1).child(depth)` of `Rng::new(seed)`.
pub fn initial_params(cfg: &TrainConfig, plan: &WidthPlan, seed: u64) -> Result<ParameterSet> {
    let config = NetworkConfig::extended(plan.depth, plan.width, cfg.activation, IoDims::PLANE);
    init_params(&config, &cfg.init, &mut Rng::new(seed).child(1).child(plan.depth as u64))
}

/// Train/test split of a run, drawn from stream `child(0)` of `Rng::new(seed)`.
///
/// The split depends on the seed only, so every depth of a sweep sees the same data.
pub fn split_for_seed(ds: &CheckerboardDataset, seed: u64) -> Result<Split> {
    split_dataset(ds, TRAIN_FRACTION, &mut Rng::new(seed).child(0))
}

/// Runs gradient descent from `start` with base rate `lr`.
pub fn train_cell(cfg: &TrainConfig, data: &TrainData, start: ParameterSet, seed: u64, lr: f64) -> Result<TrainResult> {
    Ok(train_cell_with_params(cfg, data, start, seed, lr)?.0)
}

/// [`train_cell`] that also returns the parameters with the lowest training loss.
pub fn train_cell_with_params(
    cfg: &TrainConfig,
    data: &TrainData,
    start: ParameterSet,
    seed: u64,
    lr: f64,
) -> Result<(TrainResult, ParameterSet)> {
    let plan = cfg.validate()?;
    check_plane_net(&start)?;
    let objective = NetworkObjective {
        inputs: &data.train_x,
        targets: &data.train_y,
        scale: cfg.step_scale,
    };
    let outcome = descend(&objective, start, &cfg.schedule(lr), cfg.iterations, cfg.history_every)?;
    let (train, test) = if outcome.best_loss.is_finite() {
        (
            score(&outcome.best, &data.train_x, &data.train_y, &data.train_labels)?,
            score(&outcome.best, &data.test_x, &data.test_y, &data.test_labels)?,
        )
    } else {
        let nan = Evaluation {
            loss: f64::NAN,
            accuracy: f64::NAN,
        };
        (nan, nan)
    };
    let result = TrainResult {
        depth: plan.depth,
        width: plan.width,
        actual_params: plan.actual_params,
        seed,
        lr_used: lr,
        best_train_loss: outcome.best_loss,
        best_train_acc: train.accuracy,
        test_loss_at_best: test.loss,
        test_acc_at_best: test.accuracy,
        best_iteration: outcome.best_iteration,
        diverged: outcome.diverged,
        history: outcome.history,
    };
    Ok((result, outcome.best))
}

/// Best run by training loss; diverged runs never win. Ties go to the earlier run.
///
/// When every run diverged the first one is returned (still flagged).
pub fn reduce_over_lr(runs: &[TrainResult]) -> Option<TrainResult> {
    runs.iter()
        .filter(|r| !r.diverged)
        .fold(None::<&TrainResult>, |best, r| match best {
            Some(b) if b.best_train_loss <= r.best_train_loss => Some(b),
            _ => Some(r),
        })
        .or_else(|| runs.first())
        .cloned()
}

/// All learning-rate runs of one seed and their reduction.
#[derive(Debug, Clone, PartialEq)]
pub struct SeedOutcome {
    pub runs: Vec<TrainResult>,
    pub best: TrainResult,
}

/// Trains one seed over the whole learning-rate grid from a shared start.
pub fn train_gd(cfg: &TrainConfig, data: &TrainData, seed: u64) -> Result<SeedOutcome> {
    let plan = cfg.validate()?;
    let start = initial_params(cfg, &plan, seed)?;
    let runs = cfg
        .lr_grid
        .iter()
        .map(|&lr| train_cell(cfg, data, start.clone(), seed, lr))
        .collect::<Result<Vec<_>>>()?;
    let best = reduce_over_lr(&runs).expect("grid is non-empty");
    Ok(SeedOutcome { runs, best })
}
