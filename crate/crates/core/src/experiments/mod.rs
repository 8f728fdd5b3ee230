//! Width planning under a parameter budget and the checkerboard training
//! experiments.

mod budget;
mod checkerboard;
mod depth;
mod train;

pub use budget::{activation_ratio, width_for_depth, WidthPlan};
pub use checkerboard::{split_dataset, CheckerboardDataset, Split, BLOCK, GRID_POINTS, TRAIN_FRACTION};
pub use depth::{aggregate, depth_sweep_train, run_seed, DepthSummary, MetricSummary};
pub use train::{
    classify, descend, evaluate, gather, initial_params, label_target, reduce_over_lr, scaled_junctures,
    split_for_seed, train_cell, train_cell_with_params, train_gd, DescentOutcome, Evaluation, LrSchedule, NetworkObjective, Objective,
    SeedOutcome, StepScale, TrainConfig, TrainData, TrainResult, DECAY_FACTOR, DECAY_FRACTIONS, FULL_ITERATIONS,
    FULL_LR_GRID, REDUCED_ITERATIONS, REDUCED_LR_GRID,
};
