use alloc::vec::Vec;

use super::diff::{divided_difference, EqualRule};
use crate::error::{check_dim, invalid, Result};
use crate::network::{forward, ParameterSet};
use crate::numerics::{gemm, Matrix, Op, Vector};

fn require_hidden_only(params: &ParameterSet, op: &str) -> Result<()> {
    if params.is_hidden_only() {
        Ok(())
    } else {
        Err(invalid(alloc::format!("{op} requires a hidden-only network")))
    }
}

/// `P <- P * W^T * diag(diag)`.
pub(crate) fn push_factor(p: &Matrix, weight: &Matrix, diag: &[f64]) -> Matrix {
    let mut next = Matrix::zeros(p.rows(), weight.rows());
    gemm(1.0, p, Op::N, weight, Op::T, 0.0, &mut next);
    next.scale_columns(diag);
    next
}

/// G-matrix `prod_{k=1..L} W_k^T diag(phi'(z_k))`, the transposed input Jacobian.
pub fn g_matrix(params: &ParameterSet, x: &Vector) -> Result<Matrix> {
    require_hidden_only(params, "g_matrix")?;
    let act = params.activation();
    let trace = forward(params, x)?;
    let mut p = Matrix::identity(params.width());
    for (layer, z) in params.hidden.iter().zip(&trace.pre) {
        let diag: Vec<f64> = z.iter().map(|&t| act.derivative(t)).collect();
        p = push_factor(&p, &layer.weight, &diag);
    }
    Ok(p)
}

/// C-matrix `prod_{k=1..L} W_k^T D_phi(z_k, zbar_k)` with the `0/0 = 1` convention.
pub fn c_matrix(params: &ParameterSet, x: &Vector, xbar: &Vector) -> Result<Matrix> {
    c_matrix_with(params, x, xbar, EqualRule::One)
}

/// C-matrix with an explicit rule for coinciding pre-activations.
pub fn c_matrix_with(params: &ParameterSet, x: &Vector, xbar: &Vector, rule: EqualRule) -> Result<Matrix> {
    require_hidden_only(params, "c_matrix")?;
    check_dim("c_matrix points", x.dim(), xbar.dim())?;
    let act = params.activation();
    let tx = forward(params, x)?;
    let tb = forward(params, xbar)?;
    let mut p = Matrix::identity(params.width());
    for ((layer, z), zb) in params.hidden.iter().zip(&tx.pre).zip(&tb.pre) {
        let diag: Vec<f64> = z
            .iter()
            .zip(zb.iter())
            .map(|(&u, &v)| divided_difference(u, v, act, rule))
            .collect();
        p = push_factor(&p, &layer.weight, &diag);
    }
    Ok(p)
}

/// Residual of `F(x) - F(xbar) = C(x, xbar)^T (x - xbar)`, scaled by `1 + ||x - xbar||`.
pub fn verify_c2c_identity(params: &ParameterSet, x: &Vector, xbar: &Vector) -> Result<f64> {
    let c = c_matrix(params, x, xbar)?;
    let fx = forward(params, x)?.output;
    let fb = forward(params, xbar)?.output;
    let dx = x.sub(xbar)?;
    let predicted = c.tr_mat_vec(&dx)?;
    let residual = fx.sub(&fb)?.sub(&predicted)?;
    Ok(residual.norm() / (1.0 + dx.norm()))
}
