use alloc::vec::Vec;

use crate::error::{check_dim, Result};
use crate::network::Activation;
use crate::numerics::Vector;

/// Relative gap below which a divided difference is replaced by the derivative.
pub const NEAR_EQUAL_TOL: f64 = 1e-12;

/// Value used for a divided difference whose two arguments are exactly equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum EqualRule {
    /// `0/0 = 1`.
    #[default]
    One,
    /// The derivative `phi'(u_i)`, i.e. the limit of the quotient.
    Derivative,
}

/// Diagonal of `D_phi(u, v)`, entry `i` being `(phi(u_i) - phi(v_i)) / (u_i - v_i)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiffDiagonal(pub Vector);

impl DiffDiagonal {
    pub fn entries(&self) -> &[f64] {
        &self.0
    }
}

#[inline]
pub(crate) fn divided_difference(u: f64, v: f64, act: Activation, rule: EqualRule) -> f64 {
    if u == v {
        return match rule {
            EqualRule::One => 1.0,
            EqualRule::Derivative => act.derivative(u),
        };
    }
    let gap = u - v;
    if gap.abs() < NEAR_EQUAL_TOL * u.abs().max(1.0) {
        return act.derivative(u);
    }
    (act.apply(u) - act.apply(v)) / gap
}

/// `D_phi(u, v)` with the `0/0 = 1` convention.
pub fn diff_diagonal(u: &Vector, v: &Vector, act: Activation) -> Result<DiffDiagonal> {
    diff_diagonal_with(u, v, act, EqualRule::One)
}

/// `D_phi(u, v)` with an explicit rule for exactly equal entries.
pub fn diff_diagonal_with(u: &Vector, v: &Vector, act: Activation, rule: EqualRule) -> Result<DiffDiagonal> {
    check_dim("diff_diagonal", u.dim(), v.dim())?;
    let entries: Vec<f64> = u
        .iter()
        .zip(v.iter())
        .map(|(&a, &b)| divided_difference(a, b, act, rule))
        .collect();
    Ok(DiffDiagonal(entries.into()))
}
