//! JSON layout for parameter sets.
//!
//! ```json
//! {
//!   "depth": 2, "width": 3, "activation": "relu",
//!   "io": {"input": 2, "output": 2},
//!   "input":  {"rows": 3, "cols": 2, "weight": [...], "bias": [...]},
//!   "hidden": [{"rows": 3, "cols": 3, "weight": [...], "bias": [...]}, ...],
//!   "output": {"rows": 2, "cols": 3, "weight": [...], "bias": [...]}
//! }
//! ```
//!
//! Weights are row-major. `io`, `input` and `output` are `null` for
//! hidden-only networks. Floats round-trip exactly through `serde_json`.

use anyhow::{anyhow, Result};
use serde::{Deserialize, Serialize};
use varlab_core::{IoDims, Layer, Matrix, NetworkConfig, ParameterSet, Vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LayerJson {
    pub rows: usize,
    pub cols: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IoJson {
    pub input: usize,
    pub output: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsJson {
    pub depth: usize,
    pub width: usize,
    pub activation: String,
    pub io: Option<IoJson>,
    pub input: Option<LayerJson>,
    pub hidden: Vec<LayerJson>,
    pub output: Option<LayerJson>,
}

fn layer_json(l: &Layer) -> LayerJson {
    LayerJson {
        rows: l.weight.rows(),
        cols: l.weight.cols(),
        weight: l.weight.as_slice().to_vec(),
        bias: l.bias.to_vec(),
    }
}

fn layer_from(j: &LayerJson) -> Result<Layer> {
    let w = Matrix::from_vec(j.rows, j.cols, j.weight.clone())?;
    Ok(Layer::new(w, Vector::from(j.bias.clone()))?)
}

impl From<&ParameterSet> for ParamsJson {
    fn from(p: &ParameterSet) -> Self {
        ParamsJson {
            depth: p.config.depth,
            width: p.config.width,
            activation: p.config.activation.name().to_string(),
            io: p.config.io.map(|io| IoJson {
                input: io.input,
                output: io.output,
            }),
            input: p.input.as_ref().map(layer_json),
            hidden: p.hidden.iter().map(layer_json).collect(),
            output: p.output.as_ref().map(layer_json),
        }
    }
}

impl ParamsJson {
    pub fn to_params(&self) -> Result<ParameterSet> {
        let activation = self.activation.parse().map_err(|e| anyhow!("{e}"))?;
        let config = NetworkConfig {
            depth: self.depth,
            width: self.width,
            activation,
            io: self.io.map(|io| IoDims {
                input: io.input,
                output: io.output,
            }),
        };
        let hidden = self.hidden.iter().map(layer_from).collect::<Result<Vec<_>>>()?;
        let input = self.input.as_ref().map(layer_from).transpose()?;
        let output = self.output.as_ref().map(layer_from).transpose()?;
        Ok(ParameterSet::new(config, input, hidden, output)?)
    }
}
