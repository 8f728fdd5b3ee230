use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use super::Activation;
use crate::error::{check_dim, invalid, Error, Result};
use crate::numerics::{gaussian_matrix, gaussian_vector, random_orthogonal, Matrix, Rng, Vector};

/// Dimensions of the optional input and output layers wrapped around the hidden stack.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IoDims {
    pub input: usize,
    pub output: usize,
}

impl IoDims {
    /// The 2-in, 2-out wrapping used for landscapes and the checkerboard.
    pub const PLANE: IoDims = IoDims {
        input: 2,
        output: 2,
    };
}

/// Shape of a rectangular network: `depth` hidden layers of `width` units.
///
/// With `io` set, the network is extended by an affine+activation input layer
/// (`width x io.input`) and a purely affine output layer (`io.output x width`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NetworkConfig {
    pub depth: usize,
    pub width: usize,
    pub activation: Activation,
    pub io: Option<IoDims>,
}

impl NetworkConfig {
    pub fn hidden(depth: usize, width: usize, activation: Activation) -> Self {
        NetworkConfig {
            depth,
            width,
            activation,
            io: None,
        }
    }

    pub fn extended(depth: usize, width: usize, activation: Activation, io: IoDims) -> Self {
        NetworkConfig {
            depth,
            width,
            activation,
            io: Some(io),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth == 0 || self.width == 0 {
            return Err(invalid("network depth and width must be at least 1"));
        }
        if let Some(io) = self.io {
            if io.input == 0 || io.output == 0 {
                return Err(invalid("io dimensions must be at least 1"));
            }
        }
        Ok(())
    }

    pub fn input_dim(&self) -> usize {
        self.io.map_or(self.width, |io| io.input)
    }

    pub fn output_dim(&self) -> usize {
        self.io.map_or(self.width, |io| io.output)
    }

    /// Hidden-layer weights and biases, `(d^2 + d) L`.
    pub fn hidden_param_count(&self) -> usize {
        (self.width * self.width + self.width) * self.depth
    }

    /// Weights and biases of the input and output layers (0 without io layers).
    pub fn io_param_count(&self) -> usize {
        self.io.map_or(0, |io| {
            (self.width * io.input + self.width) + (io.output * self.width + io.output)
        })
    }
}

/// Weight matrix and bias vector of one affine map.
#[derive(Debug, Clone, PartialEq)]
pub struct Layer {
    pub weight: Matrix,
    pub bias: Vector,
}

impl Layer {
    pub fn new(weight: Matrix, bias: Vector) -> Result<Self> {
        check_dim("layer bias", weight.rows(), bias.dim())?;
        Ok(Layer { weight, bias })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Layer {
            weight: Matrix::zeros(rows, cols),
            bias: Vector::zeros(rows),
        }
    }

    fn param_count(&self) -> usize {
        self.weight.rows() * self.weight.cols() + self.bias.dim()
    }

    fn axpy(&mut self, alpha: f64, other: &Layer) {
        self.weight
            .axpy(alpha, &other.weight)
            .expect("layer shapes agree");
        for (b, g) in self.bias.iter_mut().zip(other.bias.iter()) {
            *b += alpha * g;
        }
    }

    fn values(&self) -> impl Iterator<Item = &f64> {
        self.weight.as_slice().iter().chain(self.bias.iter())
    }

    fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.weight
            .as_mut_slice()
            .iter_mut()
            .chain(self.bias.iter_mut())
    }
}

/// All weights and biases of a network, together with its configuration.
///
/// Gradients share this type: a gradient is a `ParameterSet` whose entries are
/// partial derivatives.
#[derive(Debug, Clone, PartialEq)]
pub struct ParameterSet {
    pub config: NetworkConfig,
    pub input: Option<Layer>,
    pub hidden: Vec<Layer>,
    pub output: Option<Layer>,
}

impl ParameterSet {
    /// Builds a parameter set and checks every shape against `config`.
    pub fn new(
        config: NetworkConfig,
        input: Option<Layer>,
        hidden: Vec<Layer>,
        output: Option<Layer>,
    ) -> Result<Self> {
        let p = ParameterSet {
            config,
            input,
            hidden,
            output,
        };
        p.validate()?;
        Ok(p)
    }

    /// All-zero parameters of the given shape.
    pub fn zeros(config: NetworkConfig) -> Self {
        let d = config.width;
        let (input, output) = match config.io {
            Some(io) => (
                Some(Layer::zeros(d, io.input)),
                Some(Layer::zeros(io.output, d)),
            ),
            None => (None, None),
        };
        ParameterSet {
            config,
            input,
            hidden: (0..config.depth).map(|_| Layer::zeros(d, d)).collect(),
            output,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let c = &self.config;
        c.validate()?;
        check_dim("hidden layer count", c.depth, self.hidden.len())?;
        for layer in &self.hidden {
            check_dim("hidden weight rows", c.width, layer.weight.rows())?;
            check_dim("hidden weight cols", c.width, layer.weight.cols())?;
            check_dim("hidden bias", c.width, layer.bias.dim())?;
        }
        match (c.io, &self.input, &self.output) {
            (None, None, None) => Ok(()),
            (Some(io), Some(inp), Some(out)) => {
                check_dim("input weight rows", c.width, inp.weight.rows())?;
                check_dim("input weight cols", io.input, inp.weight.cols())?;
                check_dim("input bias", c.width, inp.bias.dim())?;
                check_dim("output weight rows", io.output, out.weight.rows())?;
                check_dim("output weight cols", c.width, out.weight.cols())?;
                check_dim("output bias", io.output, out.bias.dim())?;
                Ok(())
            }
            _ => Err(invalid("io layers must match the configuration")),
        }
    }

    pub fn activation(&self) -> Activation {
        self.config.activation
    }

    pub fn depth(&self) -> usize {
        self.hidden.len()
    }

    pub fn width(&self) -> usize {
        self.config.width
    }

    pub fn is_hidden_only(&self) -> bool {
        self.config.io.is_none()
    }

    /// Hidden-layer parameter count.
    pub fn hidden_param_count(&self) -> usize {
        self.hidden.iter().map(Layer::param_count).sum()
    }

    /// Hidden plus io-layer parameter count.
    pub fn total_param_count(&self) -> usize {
        self.hidden_param_count()
            + self.input.as_ref().map_or(0, Layer::param_count)
            + self.output.as_ref().map_or(0, Layer::param_count)
    }

    /// Layers in forward order: input (if any), hidden, output (if any).
    pub fn layers(&self) -> impl Iterator<Item = &Layer> {
        self.input
            .iter()
            .chain(self.hidden.iter())
            .chain(self.output.iter())
    }

    fn layers_mut(&mut self) -> impl Iterator<Item = &mut Layer> {
        self.input
            .iter_mut()
            .chain(self.hidden.iter_mut())
            .chain(self.output.iter_mut())
    }

    /// Every scalar parameter, layer by layer (weights row-major, then bias).
    pub fn values(&self) -> impl Iterator<Item = &f64> {
        self.layers().flat_map(Layer::values)
    }

    pub fn values_mut(&mut self) -> impl Iterator<Item = &mut f64> {
        self.layers_mut().flat_map(Layer::values_mut)
    }

    /// `self += alpha * other` for parameter sets of identical shape.
    pub fn axpy(&mut self, alpha: f64, other: &ParameterSet) -> Result<()> {
        if self.config != other.config {
            return Err(invalid("axpy: parameter sets have different shapes"));
        }
        for (a, b) in self.layers_mut().zip(other.layers()) {
            a.axpy(alpha, b);
        }
        Ok(())
    }

    pub fn is_finite(&self) -> bool {
        self.values().all(|v| v.is_finite())
    }
}

/// How weight matrices are drawn.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitScheme {
    /// i.i.d. `N(0, sigma^2)`, `sigma` a standard deviation.
    Normal { sigma: f64 },
    /// `sigma = sqrt(2 / fan_in)`.
    Kaiming,
    /// `sigma = sqrt(1 / fan_in)`.
    Xavier,
    /// Orthonormalized standard Gaussian sample, no variance multiplier.
    Orthogonal,
}

impl InitScheme {
    /// Weight standard deviation for a layer with `fan_in` inputs; `None` for
    /// [`InitScheme::Orthogonal`].
    pub fn weight_sigma(&self, fan_in: usize) -> Option<f64> {
        match *self {
            InitScheme::Normal { sigma } => Some(sigma),
            InitScheme::Kaiming => Some(libm::sqrt(2.0 / fan_in as f64)),
            InitScheme::Xavier => Some(libm::sqrt(1.0 / fan_in as f64)),
            InitScheme::Orthogonal => None,
        }
    }

    pub fn name(&self) -> alloc::string::String {
        match self {
            InitScheme::Normal { sigma } => alloc::format!("normal({sigma})"),
            InitScheme::Kaiming => "kaiming".into(),
            InitScheme::Xavier => "xavier".into(),
            InitScheme::Orthogonal => "orthogonal".into(),
        }
    }
}

impl fmt::Display for InitScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl FromStr for InitScheme {
    type Err = Error;

    /// Accepts `kaiming`, `xavier`, `orthogonal`, `normal` (sigma 1) and `normal(<sigma>)`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim().to_ascii_lowercase();
        match s.as_str() {
            "kaiming" | "he" => Ok(InitScheme::Kaiming),
            "xavier" | "glorot" => Ok(InitScheme::Xavier),
            "orthogonal" => Ok(InitScheme::Orthogonal),
            "normal" => Ok(InitScheme::Normal { sigma: 1.0 }),
            _ => {
                let inner = s
                    .strip_prefix("normal(")
                    .and_then(|r| r.strip_suffix(')'))
                    .ok_or_else(|| invalid(alloc::format!("unknown init scheme '{s}'")))?;
                let sigma: f64 = inner
                    .parse()
                    .map_err(|_| invalid(alloc::format!("bad sigma in '{s}'")))?;
                if !(sigma > 0.0) {
                    return Err(invalid("normal sigma must be positive"));
                }
                Ok(InitScheme::Normal { sigma })
            }
        }
    }
}

/// Weight scheme plus bias standard deviation (1 unless overridden).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Init {
    pub scheme: InitScheme,
    pub bias_sigma: f64,
}

impl Init {
    pub fn new(scheme: InitScheme) -> Self {
        Init {
            scheme,
            bias_sigma: 1.0,
        }
    }

    pub fn with_bias_sigma(mut self, bias_sigma: f64) -> Self {
        self.bias_sigma = bias_sigma;
        self
    }
}

impl From<InitScheme> for Init {
    fn from(scheme: InitScheme) -> Self {
        Init::new(scheme)
    }
}

/// Draws one layer: weight first (row-major), then bias.
pub fn sample_layer(rows: usize, cols: usize, init: &Init, rng: &mut Rng) -> Result<Layer> {
    let weight = match init.scheme.weight_sigma(cols) {
        Some(sigma) => gaussian_matrix(rows, cols, sigma, rng)?,
        None => random_orthogonal(rows, cols, rng)?,
    };
    let bias = if init.bias_sigma > 0.0 {
        gaussian_vector(rows, init.bias_sigma, rng)
    } else {
        Vector::zeros(rows)
    };
    Ok(Layer { weight, bias })
}

/// Samples a parameter set.
///
/// Layers are drawn in forward order from `rng`: input layer, hidden layers
/// `1..=L`, output layer. For hidden-only networks the first `L` layers
/// therefore coincide with any deeper network drawn from the same stream.
pub fn init_params(config: &NetworkConfig, init: &Init, rng: &mut Rng) -> Result<ParameterSet> {
    config.validate()?;
    if !(init.bias_sigma >= 0.0) {
        return Err(invalid("bias sigma must be nonnegative"));
    }
    let d = config.width;
    let input = match config.io {
        Some(io) => Some(sample_layer(d, io.input, init, rng)?),
        None => None,
    };
    let hidden = (0..config.depth)
        .map(|_| sample_layer(d, d, init, rng))
        .collect::<Result<Vec<_>>>()?;
    let output = match config.io {
        Some(io) => Some(sample_layer(io.output, d, init, rng)?),
        None => None,
    };
    Ok(ParameterSet {
        config: *config,
        input,
        hidden,
        output,
    })
}
