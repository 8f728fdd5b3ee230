use alloc::vec::Vec;

use crate::error::{invalid, Result};
use crate::numerics::Rng;

/// Points per axis of the checkerboard grid.
pub const GRID_POINTS: usize = 81;
/// Grid steps per checkerboard block.
pub const BLOCK: usize = 10;
/// Fraction of points used for training.
pub const TRAIN_FRACTION: f64 = 0.25;

/// The 8x8-block checkerboard on an 81x81 grid over `[-1, 1]^2`.
///
/// Point `k = i * 81 + j` sits at `(-1 + i/40, -1 + j/40)`. Grid lines with
/// `i % 10 == 0` or `j % 10 == 0` form the boundary and carry label 0; an
/// interior point in block `(i / 10, j / 10)` is labeled `(bi + bj) % 2`,
/// or its complement when the parity is flipped.
#[derive(Debug, Clone, PartialEq)]
pub struct CheckerboardDataset {
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<u8>,
    pub boundary: Vec<bool>,
}

impl CheckerboardDataset {
    pub fn generate() -> Self {
        Self::generate_with_parity(false)
    }

    pub fn generate_with_parity(flip: bool) -> Self {
        let n = GRID_POINTS;
        let h = 2.0 / (n - 1) as f64;
        let mut points = Vec::with_capacity(n * n);
        let mut labels = Vec::with_capacity(n * n);
        let mut boundary = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                points.push([-1.0 + i as f64 * h, -1.0 + j as f64 * h]);
                let on_edge = i % BLOCK == 0 || j % BLOCK == 0;
                boundary.push(on_edge);
                let label = if on_edge {
                    0
                } else {
                    let parity = ((i / BLOCK + j / BLOCK) % 2) as u8;
                    if flip {
                        1 - parity
                    } else {
                        parity
                    }
                };
                labels.push(label);
            }
        }
        CheckerboardDataset {
            points,
            labels,
            boundary,
        }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(i: usize, j: usize) -> usize {
        i * GRID_POINTS + j
    }

    pub fn boundary_count(&self) -> usize {
        self.boundary.iter().filter(|&&b| b).count()
    }

    pub fn interior_count(&self) -> usize {
        self.len() - self.boundary_count()
    }
}

/// Disjoint, sorted train/test index sets.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Split {
    pub train: Vec<usize>,
    pub test: Vec<usize>,
}

impl Split {
    pub fn is_train_mask(&self, n: usize) -> Vec<bool> {
        let mut mask = alloc::vec![false; n];
        for &i in &self.train {
            mask[i] = true;
        }
        mask
    }
}

/// Uniformly random split with `floor(train_fraction * n)` training points.
pub fn split_dataset(ds: &CheckerboardDataset, train_fraction: f64, rng: &mut Rng) -> Result<Split> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(invalid("train fraction must lie in (0, 1)"));
    }
    let n = ds.len();
    let n_train = libm::floor(train_fraction * n as f64) as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    rng.shuffle(&mut idx);
    let mut train = idx[..n_train].to_vec();
    let mut test = idx[n_train..].to_vec();
    train.sort_unstable();
    test.sort_unstable();
    Ok(Split { train, test })
}
