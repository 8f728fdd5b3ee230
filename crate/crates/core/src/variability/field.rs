use alloc::vec::Vec;

use crate::error::{check_dim, invalid, Result};
use crate::network::{predict_batch, ParameterSet};
use crate::numerics::Matrix;

/// Smallest grid the third-derivative stencil can use.
pub const MIN_GRID_POINTS: usize = 5;
pub const DEFAULT_GRID_POINTS: usize = 81;

/// Uniform `n x n` grid over `[lo, hi]^2`.
///
/// Point `k = i * n + j` is `(lo + i h, lo + j h)` with `h = (hi - lo) / (n - 1)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid2D {
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

impl Grid2D {
    pub fn new(n: usize, lo: f64, hi: f64) -> Result<Self> {
        if n < MIN_GRID_POINTS {
            return Err(invalid("grid needs at least 5 points per axis"));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(invalid("grid bounds must be finite with lo < hi"));
        }
        Ok(Grid2D { n, lo, hi })
    }

    /// `n x n` grid over `[-1, 1]^2`.
    pub fn square(n: usize) -> Result<Self> {
        Self::new(n, -1.0, 1.0)
    }

    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }

    pub fn coord(&self, i: usize) -> f64 {
        self.lo + i as f64 * self.spacing()
    }

    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn point(&self, k: usize) -> [f64; 2] {
        [self.coord(k / self.n), self.coord(k % self.n)]
    }

    pub fn area(&self) -> f64 {
        (self.hi - self.lo) * (self.hi - self.lo)
    }

    /// All points as columns of a `2 x n^2` matrix.
    pub fn points_matrix(&self) -> Matrix {
        let mut m = Matrix::zeros(2, self.len());
        for k in 0..self.len() {
            let p = self.point(k);
            m.set(0, k, p[0]);
            m.set(1, k, p[1]);
        }
        m
    }
}

/// Scalar values on a [`Grid2D`], in the grid's point order.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceField {
    pub grid: Grid2D,
    pub values: Vec<f64>,
}

impl SurfaceField {
    pub fn new(grid: Grid2D, values: Vec<f64>) -> Result<Self> {
        check_dim("SurfaceField", grid.len(), values.len())?;
        Ok(SurfaceField { grid, values })
    }

    pub fn from_fn(grid: Grid2D, mut f: impl FnMut(f64, f64) -> f64) -> Self {
        let values = (0..grid.len())
            .map(|k| {
                let [x, y] = grid.point(k);
                f(x, y)
            })
            .collect();
        SurfaceField { grid, values }
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.grid.n + j]
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn scaled(&self, c: f64) -> SurfaceField {
        SurfaceField {
            grid: self.grid,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }
}

/// `f(x) = |F(x)|^2` of a network with 2-dimensional input at every grid point.
pub fn scalar_field(params: &ParameterSet, grid: &Grid2D) -> Result<SurfaceField> {
    check_dim("scalar_field input", 2, params.config.input_dim())?;
    let out = predict_batch(params, &grid.points_matrix())?;
    let mut values = alloc::vec![0.0; grid.len()];
    for r in 0..out.rows() {
        for (v, o) in values.iter_mut().zip(out.row(r)) {
            *v += o * o;
        }
    }
    SurfaceField::new(*grid, values)
}

/// True iff `max - min <= eps * max(1, max |value|)`.
pub fn is_constant_field(field: &SurfaceField, eps: f64) -> bool {
    let (lo, hi) = (field.min(), field.max());
    let scale = field.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    hi - lo <= eps * scale
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{forward, Activation, IoDims, NetworkConfig};
    use crate::numerics::Vector;

    #[test]
    fn grid_layout() {
        let g = Grid2D::square(81).unwrap();
        assert_eq!(g.spacing(), 0.025);
        assert_eq!(g.point(0), [-1.0, -1.0]);
        assert_eq!(g.point(80), [-1.0, 1.0]);
        assert_eq!(g.point(81), [-0.975, -1.0]);
        assert_eq!(g.point(6560), [1.0, 1.0]);
        assert!(Grid2D::square(4).is_err());
        assert!(Grid2D::new(9, 1.0, 1.0).is_err());
    }

    #[test]
    fn zero_network_gives_zero_field() {
        let p = ParameterSet::zeros(NetworkConfig::extended(3, 4, Activation::Relu, IoDims::PLANE));
        let f = scalar_field(&p, &Grid2D::square(9).unwrap()).unwrap();
        assert!(f.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn identity_network_value_at_corner() {
        // Width 2, identity weights, relu on [-1,1]^2 shifted by +1 bias then -1 at the output.
        let config = NetworkConfig::extended(1, 2, Activation::Relu, IoDims::PLANE);
        let mut p = ParameterSet::zeros(config);
        let eye = Matrix::identity(2);
        let shift = Vector::from([1.0, 1.0]);
        let input = p.input.as_mut().unwrap();
        input.weight = eye.clone();
        input.bias = shift.clone();
        p.hidden[0].weight = eye.clone();
        let output = p.output.as_mut().unwrap();
        output.weight = eye;
        output.bias = Vector::from([-1.0, -1.0]);
        let g = Grid2D::square(5).unwrap();
        let f = scalar_field(&p, &g).unwrap();
        assert_eq!(f.at(4, 4), 2.0);
        assert_eq!(f.at(2, 2), 0.0);
    }

    #[test]
    fn matches_pointwise_forward() {
        let config = NetworkConfig::extended(4, 6, Activation::Abs, IoDims::PLANE);
        let p = crate::network::init_params(&config, &crate::Init::new(crate::InitScheme::Kaiming), &mut crate::Rng::new(8)).unwrap();
        let g = Grid2D::square(11).unwrap();
        let f = scalar_field(&p, &g).unwrap();
        for k in 0..g.len() {
            let out = forward(&p, &Vector::from(g.point(k))).unwrap().output;
            let want = out.dot(&out);
            assert!((f.values[k] - want).abs() <= 1e-12 * want.max(1.0));
        }
    }

    #[test]
    fn constant_detection() {
        let g = Grid2D::square(5).unwrap();
        assert!(is_constant_field(&SurfaceField::from_fn(g, |_, _| 5.0), 1e-12));
        let ramp = SurfaceField::from_fn(g, |x, _| (x + 1.0) / 2.0);
        assert!(!is_constant_field(&ramp, 1e-6));
    }
}
