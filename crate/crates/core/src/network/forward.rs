use alloc::vec::Vec;

use super::{Activation, Layer, ParameterSet};
use crate::error::{check_dim, Result};
use crate::numerics::{gemm, Matrix, Op, Vector};

/// Intermediate values of one forward pass.
///
/// `post[0]` is the hidden-stack input `s_0` (the input itself, or the input
/// layer's activation for extended networks); `pre[k-1] = z_k` and
/// `post[k] = s_k = phi(z_k)` for `k = 1..=L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardTrace {
    pub input_pre: Option<Vector>,
    pub pre: Vec<Vector>,
    pub post: Vec<Vector>,
    pub output: Vector,
}

impl ForwardTrace {
    /// Hidden output `s_L`.
    pub fn hidden_output(&self) -> &Vector {
        self.post.last().expect("trace has s_0")
    }
}

fn affine(layer: &Layer, x: &Vector) -> Vector {
    let mut z = layer.weight.mat_vec(x).expect("validated shapes");
    for (zi, bi) in z.iter_mut().zip(layer.bias.iter()) {
        *zi += bi;
    }
    z
}

/// Forward propagation `z_k = W_k s_{k-1} + b_k`, `s_k = phi(z_k)`.
///
/// The network output is `s_L` for hidden-only networks and `W_out s_L + b_out`
/// for extended ones.
pub fn forward(params: &ParameterSet, x: &Vector) -> Result<ForwardTrace> {
    check_dim("forward input", params.config.input_dim(), x.dim())?;
    let act = params.activation();
    let (input_pre, s0) = match &params.input {
        Some(layer) => {
            let z = affine(layer, x);
            let s = z.map(|t| act.apply(t));
            (Some(z), s)
        }
        None => (None, x.clone()),
    };
    let mut pre = Vec::with_capacity(params.depth());
    let mut post = Vec::with_capacity(params.depth() + 1);
    post.push(s0);
    for layer in &params.hidden {
        let z = affine(layer, post.last().unwrap());
        post.push(z.map(|t| act.apply(t)));
        pre.push(z);
    }
    let output = match &params.output {
        Some(layer) => affine(layer, post.last().unwrap()),
        None => post.last().unwrap().clone(),
    };
    Ok(ForwardTrace {
        input_pre,
        pre,
        post,
        output,
    })
}

/// Network output `F(x)` without keeping the trace.
pub fn evaluate_point(params: &ParameterSet, x: &Vector) -> Result<Vector> {
    Ok(forward(params, x)?.output)
}

/// Batched forward trace; every matrix has one column per sample.
#[derive(Debug, Clone, PartialEq)]
pub struct BatchTrace {
    pub input: Matrix,
    pub input_pre: Option<Matrix>,
    pub pre: Vec<Matrix>,
    pub post: Vec<Matrix>,
    pub output: Matrix,
}

fn affine_batch(layer: &Layer, x: &Matrix) -> Matrix {
    let mut z = Matrix::zeros(layer.weight.rows(), x.cols());
    gemm(1.0, &layer.weight, Op::N, x, Op::N, 0.0, &mut z);
    for (i, &b) in layer.bias.iter().enumerate() {
        z.row_mut(i).iter_mut().for_each(|t| *t += b);
    }
    z
}

fn activate(z: &Matrix, act: Activation) -> Matrix {
    let mut s = z.clone();
    s.as_mut_slice().iter_mut().for_each(|t| *t = act.apply(*t));
    s
}

/// Forward pass over a batch stored column-wise in `inputs` (`in_dim x n`).
pub fn forward_batch(params: &ParameterSet, inputs: &Matrix) -> Result<BatchTrace> {
    check_dim("forward_batch input rows", params.config.input_dim(), inputs.rows())?;
    let act = params.activation();
    let (input_pre, s0) = match &params.input {
        Some(layer) => {
            let z = affine_batch(layer, inputs);
            let s = activate(&z, act);
            (Some(z), s)
        }
        None => (None, inputs.clone()),
    };
    let mut pre = Vec::with_capacity(params.depth());
    let mut post = Vec::with_capacity(params.depth() + 1);
    post.push(s0);
    for layer in &params.hidden {
        let z = affine_batch(layer, post.last().unwrap());
        post.push(activate(&z, act));
        pre.push(z);
    }
    let output = match &params.output {
        Some(layer) => affine_batch(layer, post.last().unwrap()),
        None => post.last().unwrap().clone(),
    };
    Ok(BatchTrace {
        input: inputs.clone(),
        input_pre,
        pre,
        post,
        output,
    })
}

/// Batched outputs only (`out_dim x n`), keeping one layer alive at a time.
pub fn predict_batch(params: &ParameterSet, inputs: &Matrix) -> Result<Matrix> {
    check_dim("predict_batch input rows", params.config.input_dim(), inputs.rows())?;
    let act = params.activation();
    let mut s = match &params.input {
        Some(layer) => {
            let mut z = affine_batch(layer, inputs);
            z.as_mut_slice().iter_mut().for_each(|t| *t = act.apply(*t));
            z
        }
        None => inputs.clone(),
    };
    for layer in &params.hidden {
        let mut z = affine_batch(layer, &s);
        z.as_mut_slice().iter_mut().for_each(|t| *t = act.apply(*t));
        s = z;
    }
    Ok(match &params.output {
        Some(layer) => affine_batch(layer, &s),
        None => s,
    })
}

/// Jacobian `dF/dx` of the network output with respect to its input.
///
/// For hidden-only networks this is `diag(phi'(z_L)) W_L ... diag(phi'(z_1)) W_1`;
/// extended networks additionally include the io layers.
pub fn input_jacobian(params: &ParameterSet, x: &Vector) -> Result<Matrix> {
    let trace = forward(params, x)?;
    let act = params.activation();
    let mut jac = match (&params.input, &trace.input_pre) {
        (Some(layer), Some(z)) => {
            let mut j = layer.weight.clone();
            scale_rows(&mut j, z, act);
            j
        }
        _ => Matrix::identity(params.width()),
    };
    for (layer, z) in params.hidden.iter().zip(&trace.pre) {
        let mut next = layer.weight.mat_mul(&jac)?;
        scale_rows(&mut next, z, act);
        jac = next;
    }
    if let Some(layer) = &params.output {
        jac = layer.weight.mat_mul(&jac)?;
    }
    Ok(jac)
}

fn scale_rows(m: &mut Matrix, z: &Vector, act: Activation) {
    for (i, &zi) in z.iter().enumerate() {
        let d = act.derivative(zi);
        m.row_mut(i).iter_mut().for_each(|t| *t *= d);
    }
}
