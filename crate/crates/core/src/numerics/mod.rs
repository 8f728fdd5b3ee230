//! Dense linear algebra and random sampling primitives.

mod linalg;
mod matrix;
mod rng;
mod stats;

pub use linalg::{
    gaussian_matrix, gaussian_vector, orthogonalize, orthonormal_columns, random_orthogonal,
    spectral_norm, SpectralNorm, DEFAULT_SPECTRAL_MAX_ITER, DEFAULT_SPECTRAL_TOL, RANK_TOLERANCE,
};
pub use matrix::{gemm, Matrix, Op, Vector};
pub use rng::{splitmix64, Rng};
pub use stats::{geometric_mean, mean_and_variance, median, DEFAULT_ZERO_THRESHOLD};
