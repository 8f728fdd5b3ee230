use alloc::vec::Vec;

use super::diff::{divided_difference, EqualRule};
use super::products::push_factor;
use crate::error::{check_dim, invalid, Result};
use crate::network::{sample_layer, Activation, Init, Layer};
use crate::numerics::{spectral_norm, Matrix, Rng, Vector, DEFAULT_SPECTRAL_MAX_ITER, DEFAULT_SPECTRAL_TOL};

/// Running products leaving `[RENORM_LOW, RENORM_HIGH]` in max-abs entry are
/// rescaled by a power of two.
pub const RENORM_HIGH: f64 = 1e300;
pub const RENORM_LOW: f64 = 1e-300;

/// A matrix stored as `mantissa * 2^log2_scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaledMatrix {
    pub mantissa: Matrix,
    pub log2_scale: i32,
}

impl ScaledMatrix {
    fn identity(n: usize) -> Self {
        ScaledMatrix {
            mantissa: Matrix::identity(n),
            log2_scale: 0,
        }
    }

    fn renormalize(&mut self) {
        let m = self.mantissa.max_abs();
        if m > RENORM_HIGH || (m > 0.0 && m < RENORM_LOW) {
            let e = libm::ilogb(m);
            for v in self.mantissa.as_mut_slice() {
                *v = libm::scalbn(*v, -e);
            }
            self.log2_scale += e;
        }
    }

    /// The represented matrix (may overflow or underflow when the scale is extreme).
    pub fn to_matrix(&self) -> Matrix {
        let mut m = self.mantissa.clone();
        for v in m.as_mut_slice() {
            *v = libm::scalbn(*v, self.log2_scale);
        }
        m
    }
}

/// Incremental state of a depth sweep: the two forward traces and the running
/// products `C_L`, `G_L(x)` and `G_L(xbar)`.
///
/// Each call to [`SweepState::advance`] draws one more hidden layer from the
/// parameter stream (weights, then bias, exactly as `init_params` does) and
/// multiplies it onto the products, so depth `L` costs `O(L d^3)` overall.
#[derive(Debug, Clone)]
pub struct SweepState {
    width: usize,
    activation: Activation,
    init: Init,
    rng: Rng,
    s_x: Vector,
    s_xbar: Vector,
    depth: usize,
    pub c: ScaledMatrix,
    pub g_x: ScaledMatrix,
    pub g_xbar: ScaledMatrix,
}

impl SweepState {
    pub fn new(activation: Activation, init: Init, x: &Vector, xbar: &Vector, params_rng: Rng) -> Result<Self> {
        let width = x.dim();
        if width == 0 {
            return Err(invalid("sweep width must be at least 1"));
        }
        check_dim("sweep points", width, xbar.dim())?;
        Ok(SweepState {
            width,
            activation,
            init,
            rng: params_rng,
            s_x: x.clone(),
            s_xbar: xbar.clone(),
            depth: 0,
            c: ScaledMatrix::identity(width),
            g_x: ScaledMatrix::identity(width),
            g_xbar: ScaledMatrix::identity(width),
        })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Draws layer `depth + 1` and returns it.
    pub fn advance(&mut self) -> Result<Layer> {
        let act = self.activation;
        let layer = sample_layer(self.width, self.width, &self.init, &mut self.rng)?;
        let z = affine(&layer, &self.s_x);
        let zb = affine(&layer, &self.s_xbar);
        let d_c: Vec<f64> = z
            .iter()
            .zip(zb.iter())
            .map(|(&u, &v)| divided_difference(u, v, act, EqualRule::One))
            .collect();
        let d_x: Vec<f64> = z.iter().map(|&t| act.derivative(t)).collect();
        let d_xb: Vec<f64> = zb.iter().map(|&t| act.derivative(t)).collect();

        for (prod, diag) in [
            (&mut self.c, &d_c),
            (&mut self.g_x, &d_x),
            (&mut self.g_xbar, &d_xb),
        ] {
            prod.mantissa = push_factor(&prod.mantissa, &layer.weight, diag);
            prod.renormalize();
        }
        self.s_x = z.map(|t| act.apply(t));
        self.s_xbar = zb.map(|t| act.apply(t));
        self.depth += 1;
        Ok(layer)
    }
}

fn affine(layer: &Layer, s: &Vector) -> Vector {
    let mut z = layer.weight.mat_vec(s).expect("square layer");
    for (zi, b) in z.iter_mut().zip(layer.bias.iter()) {
        *zi += b;
    }
    z
}

/// Spectral norms of the C- and G-matrices at one depth.
///
/// `norm_c * 2^log2_scale_c` is the norm of `C_L`; the G norms are stored as
/// plain values.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixSweepRecord {
    pub depth: usize,
    pub norm_c: f64,
    pub log2_scale_c: i32,
    pub norm_g_x: f64,
    pub norm_g_xbar: f64,
    pub seed: u64,
    pub activation: Activation,
    pub init: Init,
    /// False when any of the three power iterations hit its iteration cap.
    pub converged: bool,
}

impl MatrixSweepRecord {
    pub fn log10_norm_c(&self) -> f64 {
        libm::log10(self.norm_c) + self.log2_scale_c as f64 * core::f64::consts::LOG10_2
    }

    pub fn log10_norm_g_x(&self) -> f64 {
        libm::log10(self.norm_g_x)
    }

    pub fn log10_norm_g_xbar(&self) -> f64 {
        libm::log10(self.norm_g_xbar)
    }
}

/// Parameters of one depth sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub width: usize,
    pub max_depth: usize,
    pub activation: Activation,
    pub init: Init,
    /// Recorded in every row; not used for sampling by [`depth_sweep`].
    pub seed: u64,
}

/// Child stream of the sweep generator used for power-iteration start vectors.
const POWER_STREAM: u64 = u64::MAX;

/// Sweeps depth `1..=max_depth`, recording spectral norms of `C_L(x, xbar)`,
/// `G_L(x)` and `G_L(xbar)` at every depth.
///
/// Layers are drawn from `rng`; power iterations start from a child stream of
/// `rng`, so the parameters match `init_params` on the same generator.
pub fn depth_sweep(spec: &SweepSpec, x: &Vector, xbar: &Vector, rng: &mut Rng) -> Result<Vec<MatrixSweepRecord>> {
    if spec.max_depth == 0 {
        return Err(invalid("max_depth must be at least 1"));
    }
    check_dim("sweep width", spec.width, x.dim())?;
    let mut power_rng = rng.child(POWER_STREAM);
    let mut state = SweepState::new(spec.activation, spec.init, x, xbar, rng.clone())?;
    let mut records = Vec::with_capacity(spec.max_depth);
    for _ in 0..spec.max_depth {
        state.advance()?;
        let c = spectral_norm(&state.c.mantissa, DEFAULT_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITER, &mut power_rng);
        let gx = spectral_norm(&state.g_x.mantissa, DEFAULT_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITER, &mut power_rng);
        let gb = spectral_norm(&state.g_xbar.mantissa, DEFAULT_SPECTRAL_TOL, DEFAULT_SPECTRAL_MAX_ITER, &mut power_rng);
        records.push(MatrixSweepRecord {
            depth: state.depth(),
            norm_c: c.value,
            log2_scale_c: state.c.log2_scale,
            norm_g_x: libm::scalbn(gx.value, state.g_x.log2_scale),
            norm_g_xbar: libm::scalbn(gb.value, state.g_xbar.log2_scale),
            seed: spec.seed,
            activation: spec.activation,
            init: spec.init,
            converged: c.converged && gx.converged && gb.converged,
        });
    }
    *rng = state.rng;
    Ok(records)
}

/// Point pair with i.i.d. uniform `[-1, 1]` coordinates.
pub fn random_point_pair(dim: usize, rng: &mut Rng) -> (Vector, Vector) {
    let mut draw = || -> Vector {
        (0..dim)
            .map(|_| rng.uniform_in(-1.0, 1.0))
            .collect::<Vec<_>>()
            .into()
    };
    let x = draw();
    let xbar = draw();
    (x, xbar)
}

/// Self-contained sweep under `spec.seed`: the point pair comes from child
/// stream 0 of `Rng::new(seed)` and the layers from child stream 1.
pub fn seeded_depth_sweep(spec: &SweepSpec) -> Result<Vec<MatrixSweepRecord>> {
    let root = Rng::new(spec.seed);
    let (x, xbar) = random_point_pair(spec.width, &mut root.child(0));
    depth_sweep(spec, &x, &xbar, &mut root.child(1))
}
