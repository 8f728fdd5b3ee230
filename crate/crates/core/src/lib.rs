//! Variability analysis for fully connected networks under a fixed parameter budget.
//!
//! The crate is `no_std` (with `alloc`) and covers:
//!
//! - [`numerics`]: dense matrices, a splittable seeded generator, Householder
//!   orthogonalization, power-iteration spectral norms and the zero-aware
//!   geometric mean.
//! - [`network`]: rectangular networks `x -> phi(W_L ... phi(W_1 x + b_1) ... + b_L)`
//!   with optional affine input/output layers, initialization schemes, forward
//!   traces, input Jacobians and least-squares backpropagation.
//! - [`analysis`]: G-matrices (transposed input Jacobians), C-matrices built from
//!   divided differences, the exact difference identity
//!   `F(x) - F(xbar) = C(x, xbar)^T (x - xbar)`, incremental depth sweeps and the
//!   distance-preservation probabilities of ReLU and absolute-value activations.
//! - [`variability`]: landscapes `||F(x)||^2` on grids over `[-1, 1]^2` and the
//!   third-derivative variability measure `V3`.
//! - [`experiments`]: width planning at a fixed budget, activation ratios, the
//!   81x81 checkerboard benchmark and full-batch gradient-descent training.
//!
//! Enable the `std` feature to let the GEMM backend use runtime CPU feature
//! detection.
#![cfg_attr(not(feature = "std"), no_std)]
#![warn(missing_debug_implementations)]

extern crate alloc;

pub mod analysis;
pub mod error;
pub mod experiments;
pub mod network;
pub mod numerics;
pub mod variability;

pub use error::{Error, Result};
pub use network::{Activation, Init, InitScheme, IoDims, Layer, NetworkConfig, ParameterSet};
pub use numerics::{Matrix, Rng, Vector};
