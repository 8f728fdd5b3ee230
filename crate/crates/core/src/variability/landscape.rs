use alloc::vec::Vec;

use super::field::{is_constant_field, scalar_field, Grid2D, SurfaceField};
use crate::error::Result;
use crate::experiments::width_for_depth;
use crate::network::{init_params, Activation, Init, IoDims, NetworkConfig};
use crate::numerics::Rng;

/// Flatness tolerance for normalized surfaces.
pub const COLLAPSE_EPS: f64 = 1e-3;

/// A surface divided by its own maximum.
#[derive(Debug, Clone, PartialEq)]
pub struct Landscape {
    pub field: SurfaceField,
    pub z_max: f64,
    /// `z_max == 0`, or the normalized surface is constant to [`COLLAPSE_EPS`].
    pub collapsed: bool,
}

impl Landscape {
    pub fn from_field(raw: SurfaceField) -> Landscape {
        let z_max = raw.max();
        if !(z_max > 0.0) {
            let zeros = raw.scaled(0.0);
            return Landscape {
                field: zeros,
                z_max: 0.0,
                collapsed: true,
            };
        }
        let field = raw.scaled(1.0 / z_max);
        let collapsed = is_constant_field(&field, COLLAPSE_EPS);
        Landscape {
            field,
            z_max,
            collapsed,
        }
    }
}

/// `|F(x)|^2 / z_max` on the grid for `samples` independent networks of depth
/// `depth` under the budget. Sample `s` draws from `rng.child(s)`.
pub fn landscape_suite(
    depth: usize,
    budget: usize,
    activation: Activation,
    init: &Init,
    grid: &Grid2D,
    samples: usize,
    rng: &Rng,
) -> Result<Vec<Landscape>> {
    (0..samples).map(|s| landscape_sample(depth, budget, activation, init, grid, rng, s)).collect()
}

/// Sample `s` of [`landscape_suite`].
pub fn landscape_sample(
    depth: usize,
    budget: usize,
    activation: Activation,
    init: &Init,
    grid: &Grid2D,
    rng: &Rng,
    s: usize,
) -> Result<Landscape> {
    let plan = width_for_depth(budget, depth)?;
    let config = NetworkConfig::extended(depth, plan.width, activation, IoDims::PLANE);
    let params = init_params(&config, init, &mut rng.child(s as u64))?;
    Ok(Landscape::from_field(scalar_field(&params, grid)?))
}
