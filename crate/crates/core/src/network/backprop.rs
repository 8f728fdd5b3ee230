use super::forward::forward_batch;
use super::{Activation, Layer, ParameterSet};
use crate::error::{check_dim, Error, Result};
use crate::numerics::{gemm, Matrix, Op, Vector};

/// Least-squares loss `sum_i ||F(x_i) - y_i||^2` and its gradient.
pub fn loss_and_gradient(params: &ParameterSet, batch: &[(Vector, Vector)]) -> Result<(f64, ParameterSet)> {
    if batch.is_empty() {
        return Err(Error::Empty("loss_and_gradient batch"));
    }
    let (inputs, targets) = stack_batch(params, batch)?;
    loss_and_gradient_batch(params, &inputs, &targets)
}

/// Packs `(x, y)` pairs into column-per-sample matrices.
pub fn stack_batch(params: &ParameterSet, batch: &[(Vector, Vector)]) -> Result<(Matrix, Matrix)> {
    if batch.is_empty() {
        return Err(Error::Empty("batch"));
    }
    let (din, dout) = (params.config.input_dim(), params.config.output_dim());
    let mut inputs = Matrix::zeros(din, batch.len());
    let mut targets = Matrix::zeros(dout, batch.len());
    for (j, (x, y)) in batch.iter().enumerate() {
        check_dim("batch input", din, x.dim())?;
        check_dim("batch target", dout, y.dim())?;
        for (i, &v) in x.iter().enumerate() {
            inputs.set(i, j, v);
        }
        for (i, &v) in y.iter().enumerate() {
            targets.set(i, j, v);
        }
    }
    Ok((inputs, targets))
}

/// Least-squares loss over column-stored samples only.
pub fn batch_loss(outputs: &Matrix, targets: &Matrix) -> f64 {
    outputs
        .as_slice()
        .iter()
        .zip(targets.as_slice())
        .map(|(o, y)| (o - y) * (o - y))
        .sum()
}

/// Loss and gradient for column-stored inputs (`in_dim x n`) and targets (`out_dim x n`).
///
/// Reverse-mode differentiation through the batched trace; kinks use `phi'(0) = 0`.
pub fn loss_and_gradient_batch(
    params: &ParameterSet,
    inputs: &Matrix,
    targets: &Matrix,
) -> Result<(f64, ParameterSet)> {
    check_dim("targets rows", params.config.output_dim(), targets.rows())?;
    check_dim("targets cols", inputs.cols(), targets.cols())?;
    let act = params.activation();
    let trace = forward_batch(params, inputs)?;
    let loss = batch_loss(&trace.output, targets);

    // dLoss/dOutput = 2 (F - y)
    let mut delta = trace.output.clone();
    for (d, y) in delta.as_mut_slice().iter_mut().zip(targets.as_slice()) {
        *d = 2.0 * (*d - y);
    }

    let mut grad = ParameterSet::zeros(params.config);
    let s_last = trace.post.last().expect("s_0 present");
    if let (Some(layer), Some(g)) = (&params.output, grad.output.as_mut()) {
        weight_and_bias_grad(&delta, s_last, g);
        delta = back_through(layer, &delta);
    }

    let depth = params.depth();
    for k in (0..depth).rev() {
        apply_derivative(&mut delta, &trace.pre[k], act);
        weight_and_bias_grad(&delta, &trace.post[k], &mut grad.hidden[k]);
        if k > 0 || params.input.is_some() {
            delta = back_through(&params.hidden[k], &delta);
        }
    }

    if let (Some(z_in), Some(g)) = (&trace.input_pre, grad.input.as_mut()) {
        apply_derivative(&mut delta, z_in, act);
        weight_and_bias_grad(&delta, &trace.input, g);
    }
    Ok((loss, grad))
}

fn apply_derivative(delta: &mut Matrix, z: &Matrix, act: Activation) {
    for (d, &zi) in delta.as_mut_slice().iter_mut().zip(z.as_slice()) {
        *d *= act.derivative(zi);
    }
}

/// `gW = delta * s^T`, `gb = row sums of delta` (summed left to right).
fn weight_and_bias_grad(delta: &Matrix, s: &Matrix, g: &mut Layer) {
    gemm(1.0, delta, Op::N, s, Op::T, 0.0, &mut g.weight);
    for (i, b) in g.bias.iter_mut().enumerate() {
        *b = delta.row(i).iter().sum();
    }
}

/// `W^T delta`.
fn back_through(layer: &Layer, delta: &Matrix) -> Matrix {
    let mut out = Matrix::zeros(layer.weight.cols(), delta.cols());
    gemm(1.0, &layer.weight, Op::T, delta, Op::N, 0.0, &mut out);
    out
}
