//! G-matrices, C-matrices and the collapse-to-constants diagnostics built on them.
//!
//! For a hidden-only network `F_L` the G-matrix `prod_k W_k^T diag(phi'(z_k))`
//! is the transposed input Jacobian, while the C-matrix replaces each
//! derivative diagonal by divided differences between the traces of two
//! inputs. The C-matrix maps input differences to output differences exactly,
//! so its decay with depth forces the network towards a constant.

mod diff;
mod probability;
mod products;
mod sweep;

pub use diff::{diff_diagonal, diff_diagonal_with, DiffDiagonal, EqualRule, NEAR_EQUAL_TOL};
pub use probability::{four_sigma, preserve_probability_closed, preserve_probability_mc};
pub use products::{c_matrix, c_matrix_with, g_matrix, verify_c2c_identity};
pub use sweep::{
    depth_sweep, random_point_pair, seeded_depth_sweep, MatrixSweepRecord, ScaledMatrix,
    SweepSpec, SweepState, RENORM_HIGH, RENORM_LOW,
};
