//! Loss-landscape surfaces of `|F(x)|^2` over a 2-D grid and the
//! third-derivative variability measure V3.

mod field;
mod landscape;
mod v3;

pub use field::{is_constant_field, scalar_field, Grid2D, SurfaceField, DEFAULT_GRID_POINTS, MIN_GRID_POINTS};
pub use landscape::{landscape_sample, landscape_suite, Landscape, COLLAPSE_EPS};
pub use v3::{
    aggregate_v3, interior_norm_sq, sample_params, third_partials_fd, v3_measure, v3_of_field, v3_sample,
    v3_sample_at, ThirdPartials, V3Config, V3Point, STENCIL_MARGIN,
};
