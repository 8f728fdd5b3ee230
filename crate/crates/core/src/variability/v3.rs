use alloc::vec::Vec;

use super::field::{scalar_field, Grid2D, SurfaceField, DEFAULT_GRID_POINTS};
use crate::error::{invalid, Result};
use crate::experiments::{width_for_depth, WidthPlan};
use crate::network::{init_params, Activation, Init, InitScheme, IoDims, NetworkConfig, ParameterSet};
use crate::numerics::{geometric_mean, Rng, DEFAULT_ZERO_THRESHOLD};

/// Grid points excluded at each edge by the 5-point stencil.
pub const STENCIL_MARGIN: usize = 2;

/// Third partial derivatives along each axis on the interior points
/// `i, j in [2, n - 3]`, stored row-major over the `(n - 4) x (n - 4)` block.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdPartials {
    pub interior: usize,
    pub d3x: Vec<f64>,
    pub d3y: Vec<f64>,
}

fn stencil(f2m: f64, f1m: f64, f1p: f64, f2p: f64, h3: f64) -> f64 {
    (f2p - 2.0 * f1p + 2.0 * f1m - f2m) / (2.0 * h3)
}

/// Central difference `(f(x+2h) - 2f(x+h) + 2f(x-h) - f(x-2h)) / (2h^3)` along
/// each axis, exact for cubics.
pub fn third_partials_fd(field: &SurfaceField) -> ThirdPartials {
    let n = field.grid.n;
    let h = field.grid.spacing();
    let h3 = h * h * h;
    let m = n - 2 * STENCIL_MARGIN;
    let mut d3x = Vec::with_capacity(m * m);
    let mut d3y = Vec::with_capacity(m * m);
    let f = |i: usize, j: usize| field.at(i, j);
    for i in STENCIL_MARGIN..n - STENCIL_MARGIN {
        for j in STENCIL_MARGIN..n - STENCIL_MARGIN {
            d3x.push(stencil(f(i - 2, j), f(i - 1, j), f(i + 1, j), f(i + 2, j), h3));
            d3y.push(stencil(f(i, j - 2), f(i, j - 1), f(i, j + 1), f(i, j + 2), h3));
        }
    }
    ThirdPartials { interior: m, d3x, d3y }
}

/// Squared `L^2` norm of the field on the interior points: mean of `f^2` times the area.
pub fn interior_norm_sq(field: &SurfaceField) -> f64 {
    let n = field.grid.n;
    let mut sum = 0.0;
    for i in STENCIL_MARGIN..n - STENCIL_MARGIN {
        for j in STENCIL_MARGIN..n - STENCIL_MARGIN {
            sum += field.at(i, j) * field.at(i, j);
        }
    }
    let m = n - 2 * STENCIL_MARGIN;
    sum / (m * m) as f64 * field.grid.area()
}

/// `V3 = int sum_i |d^3 f / dx_i^3|^2 / int f^2`, both integrals taken as
/// interior means times the area. Zero when `int f^2 < zero_threshold`.
pub fn v3_of_field(field: &SurfaceField, zero_threshold: f64) -> f64 {
    let norm_sq = interior_norm_sq(field);
    if !(norm_sq >= zero_threshold) || norm_sq == 0.0 {
        return 0.0;
    }
    let d = third_partials_fd(field);
    let sum: f64 = d.d3x.iter().zip(&d.d3y).map(|(a, b)| a * a + b * b).sum();
    let num = sum / d.d3x.len() as f64 * field.grid.area();
    num / norm_sq
}

/// V3 of `|F(x)|^2` for one parameter set.
pub fn v3_sample(params: &ParameterSet, grid: &Grid2D, zero_threshold: f64) -> Result<f64> {
    Ok(v3_of_field(&scalar_field(params, grid)?, zero_threshold))
}

#[derive(Debug, Clone, PartialEq)]
pub struct V3Config {
    pub grid: Grid2D,
    pub num_samples: usize,
    pub zero_threshold: f64,
    pub init: Init,
    pub activation: Activation,
    pub budget: usize,
}

impl V3Config {
    /// 1000 samples on the 81x81 grid with a hidden budget of 3300.
    pub fn standard(activation: Activation, scheme: InitScheme) -> Self {
        V3Config {
            grid: Grid2D::square(DEFAULT_GRID_POINTS).expect("valid default grid"),
            num_samples: 1000,
            zero_threshold: DEFAULT_ZERO_THRESHOLD,
            init: Init::new(scheme),
            activation,
            budget: 3300,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.num_samples == 0 {
            return Err(invalid("num_samples must be at least 1"));
        }
        if !(self.zero_threshold >= 0.0) {
            return Err(invalid("zero threshold must be nonnegative"));
        }
        Ok(())
    }
}

/// Aggregated V3 at one depth.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct V3Point {
    pub depth: usize,
    pub width: usize,
    /// Geometric mean over samples.
    pub v3: f64,
    pub num_zero_samples: usize,
}

/// Parameter draw for sample `s` at the planned depth: stream `child(L).child(s)`.
pub fn sample_params(cfg: &V3Config, plan: &WidthPlan, rng: &Rng, s: usize) -> Result<ParameterSet> {
    let config = NetworkConfig::extended(plan.depth, plan.width, cfg.activation, IoDims::PLANE);
    init_params(&config, &cfg.init, &mut rng.child(plan.depth as u64).child(s as u64))
}

/// V3 of sample `s` at `depth`; pure in `(cfg, depth, rng key, s)`.
pub fn v3_sample_at(cfg: &V3Config, depth: usize, rng: &Rng, s: usize) -> Result<f64> {
    let plan = width_for_depth(cfg.budget, depth)?;
    v3_sample(&sample_params(cfg, &plan, rng, s)?, &cfg.grid, cfg.zero_threshold)
}

/// Geometric mean of per-sample values, in sample order.
pub fn aggregate_v3(cfg: &V3Config, depth: usize, samples: &[f64]) -> Result<V3Point> {
    let plan = width_for_depth(cfg.budget, depth)?;
    Ok(V3Point {
        depth,
        width: plan.width,
        v3: geometric_mean(samples, cfg.zero_threshold)?,
        num_zero_samples: samples.iter().filter(|&&v| v < cfg.zero_threshold).count(),
    })
}

/// V3 for each depth, with the width set by the budget.
pub fn v3_measure(cfg: &V3Config, depths: &[usize], rng: &Rng) -> Result<Vec<V3Point>> {
    cfg.validate()?;
    depths
        .iter()
        .map(|&depth| {
            let samples = (0..cfg.num_samples)
                .map(|s| v3_sample_at(cfg, depth, rng, s))
                .collect::<Result<Vec<_>>>()?;
            aggregate_v3(cfg, depth, &samples)
        })
        .collect()
}
