use alloc::vec;
use alloc::vec::Vec;

use super::matrix::{norm2, Matrix, Vector};
use super::rng::Rng;
use crate::error::{invalid, Error, Result};

/// Relative pivot size below which a QR factorization is declared rank deficient.
pub const RANK_TOLERANCE: f64 = 1e-12;

/// `rows x cols` matrix of i.i.d. `N(0, sigma^2)` entries, filled row by row.
///
/// `sigma` is the standard deviation.
pub fn gaussian_matrix(rows: usize, cols: usize, sigma: f64, rng: &mut Rng) -> Result<Matrix> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid("gaussian_matrix: sigma must be positive and finite"));
    }
    if rows == 0 || cols == 0 {
        return Err(invalid("gaussian_matrix: dimensions must be positive"));
    }
    Ok(Matrix::from_fn(rows, cols, |_, _| rng.normal(sigma)))
}

pub fn gaussian_vector(dim: usize, sigma: f64, rng: &mut Rng) -> Vector {
    (0..dim)
        .map(|_| rng.normal(sigma))
        .collect::<Vec<_>>()
        .into()
}

/// Orthogonal factor `Q` of the Householder QR factorization of a square matrix,
/// with column signs chosen so that `R` has a positive diagonal.
pub fn orthogonalize(m: &Matrix) -> Result<Matrix> {
    if m.rows() != m.cols() {
        return Err(invalid("orthogonalize: matrix must be square"));
    }
    orthonormal_columns(m)
}

/// Thin `Q` (same shape as `m`, `rows >= cols`) from Householder QR.
pub fn orthonormal_columns(m: &Matrix) -> Result<Matrix> {
    let (rows, cols) = m.shape();
    if rows < cols {
        return Err(invalid("orthonormal_columns: need rows >= cols"));
    }
    let scale = m.frobenius_norm();
    // Work column-major: a[j] is column j.
    let mut a: Vec<Vec<f64>> = (0..cols).map(|j| m.column(j).into_vec()).collect();
    let mut reflectors: Vec<Vec<f64>> = Vec::with_capacity(cols);
    let mut r_diag = Vec::with_capacity(cols);

    for k in 0..cols {
        let x = &a[k][k..];
        let alpha = norm2(x);
        let pivot = if x[0] >= 0.0 { -alpha } else { alpha };
        if !(alpha > RANK_TOLERANCE * scale) {
            return Err(Error::RankDeficient {
                column: k,
                pivot: alpha,
            });
        }
        let mut v = x.to_vec();
        v[0] -= pivot;
        let vnorm = norm2(&v);
        v.iter_mut().for_each(|t| *t /= vnorm);
        for col in a.iter_mut().skip(k) {
            reflect(&v, &mut col[k..]);
        }
        r_diag.push(pivot);
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{n-1} applied to the first `cols` unit vectors.
    let mut q = Matrix::zeros(rows, cols);
    for j in 0..cols {
        let mut e = vec![0.0; rows];
        e[j] = 1.0;
        for (k, v) in reflectors.iter().enumerate().rev() {
            reflect(v, &mut e[k..]);
        }
        let sign = if r_diag[j] < 0.0 { -1.0 } else { 1.0 };
        for (i, &val) in e.iter().enumerate() {
            q.set(i, j, sign * val);
        }
    }
    Ok(q)
}

/// `x <- (I - 2 v v^T) x` for unit `v`.
fn reflect(v: &[f64], x: &mut [f64]) {
    let s: f64 = v.iter().zip(x.iter()).map(|(a, b)| a * b).sum();
    for (xi, vi) in x.iter_mut().zip(v) {
        *xi -= 2.0 * s * vi;
    }
}

/// Draws a Gaussian sample and orthonormalizes it, resampling degenerate draws.
///
/// Tall shapes get orthonormal columns, wide shapes orthonormal rows.
pub fn random_orthogonal(rows: usize, cols: usize, rng: &mut Rng) -> Result<Matrix> {
    let (tall_r, tall_c) = if rows >= cols { (rows, cols) } else { (cols, rows) };
    loop {
        let sample = gaussian_matrix(tall_r, tall_c, 1.0, rng)?;
        match orthonormal_columns(&sample) {
            Ok(q) if rows >= cols => return Ok(q),
            Ok(q) => return Ok(q.transpose()),
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
}

/// Result of a power-iteration run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralNorm {
    pub value: f64,
    pub iterations: usize,
    /// False when `max_iter` was hit before the relative change dropped below `tol`.
    pub converged: bool,
}

pub const DEFAULT_SPECTRAL_TOL: f64 = 1e-8;
pub const DEFAULT_SPECTRAL_MAX_ITER: usize = 1000;

/// Largest singular value by power iteration on `m^T m` from a seeded random
/// unit start vector.
///
/// The matrix is rescaled by its largest entry first, so results are accurate
/// for any finite magnitude. Iteration stops once successive estimates of
/// `||m v||` differ relatively by less than `tol`.
pub fn spectral_norm(m: &Matrix, tol: f64, max_iter: usize, rng: &mut Rng) -> SpectralNorm {
    let scale = m.max_abs();
    if scale == 0.0 {
        return SpectralNorm {
            value: 0.0,
            iterations: 0,
            converged: true,
        };
    }
    let a = m.scaled(1.0 / scale);
    let mut v = gaussian_vector(a.cols(), 1.0, rng);
    let n = v.norm();
    v.iter_mut().for_each(|t| *t /= n);

    let mut estimate = 0.0;
    for it in 1..=max_iter.max(1) {
        let w = a.mat_vec(&v).expect("shape checked");
        let current = w.norm();
        if current == 0.0 {
            // Start vector fell into the null space; the norm is known to be > 0.
            v = gaussian_vector(a.cols(), 1.0, rng);
            let n = v.norm();
            v.iter_mut().for_each(|t| *t /= n);
            continue;
        }
        let mut u = a.tr_mat_vec(&w).expect("shape checked");
        let un = u.norm();
        u.iter_mut().for_each(|t| *t /= un);
        v = u;
        if (current - estimate).abs() < tol * current {
            return SpectralNorm {
                value: current * scale,
                iterations: it,
                converged: true,
            };
        }
        estimate = current;
    }
    // Final estimate from the last iterate.
    let last = a.mat_vec(&v).expect("shape checked").norm();
    SpectralNorm {
        value: last.max(estimate) * scale,
        iterations: max_iter,
        converged: false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn qtq_error(q: &Matrix) -> f64 {
        let qtq = q.transpose().mat_mul(q).unwrap();
        qtq.max_abs_diff(&Matrix::identity(q.cols()))
    }

    #[test]
    fn gaussian_moments() {
        let mut rng = Rng::new(11);
        let m = gaussian_matrix(1000, 1000, 1.0, &mut rng).unwrap();
        let n = 1e6;
        let mean = m.as_slice().iter().sum::<f64>() / n;
        assert!(mean.abs() < 4e-3, "mean {mean}");

        let m = gaussian_matrix(1000, 1000, 0.5, &mut rng).unwrap();
        let mean = m.as_slice().iter().sum::<f64>() / n;
        let var = m.as_slice().iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((var.sqrt() - 0.5).abs() < 2e-3, "std {}", var.sqrt());
    }

    #[test]
    fn gaussian_is_deterministic_and_validated() {
        let a = gaussian_matrix(3, 4, 1.0, &mut Rng::new(5)).unwrap();
        let b = gaussian_matrix(3, 4, 1.0, &mut Rng::new(5)).unwrap();
        assert_eq!(a, b);
        assert!(gaussian_matrix(3, 4, 0.0, &mut Rng::new(5)).is_err());
        assert!(gaussian_matrix(3, 4, -1.0, &mut Rng::new(5)).is_err());
    }

    #[test]
    fn orthogonalize_cases() {
        let q = orthogonalize(&Matrix::identity(4)).unwrap();
        assert!(qtq_error(&q) <= 1e-12);

        let mut rng = Rng::new(3);
        let g = gaussian_matrix(8, 8, 1.0, &mut rng).unwrap();
        assert!(qtq_error(&orthogonalize(&g).unwrap()) <= 1e-12);

        let d = Matrix::from_diag(&[2.0, 3.0]);
        let q = orthogonalize(&d).unwrap();
        assert!((q.get(0, 0).abs() - 1.0).abs() < 1e-15 && q.get(1, 0) == 0.0);
        assert!((q.get(1, 1).abs() - 1.0).abs() < 1e-15 && q.get(0, 1) == 0.0);
    }

    #[test]
    fn orthogonalize_spans_input_columns() {
        let mut rng = Rng::new(8);
        let g = gaussian_matrix(6, 6, 1.0, &mut rng).unwrap();
        let q = orthogonalize(&g).unwrap();
        // R = Q^T G must be upper triangular with positive diagonal.
        let r = q.transpose().mat_mul(&g).unwrap();
        for i in 0..6 {
            assert!(r.get(i, i) > 0.0);
            for j in 0..i {
                assert!(r.get(i, j).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthogonalize_rejects_rank_deficiency() {
        let m = Matrix::from_rows(&[&[1.0, 2.0], &[2.0, 4.0]]).unwrap();
        assert!(matches!(
            orthogonalize(&m),
            Err(Error::RankDeficient { column: 1, .. })
        ));
        assert!(orthogonalize(&Matrix::zeros(3, 3)).is_err());
        assert!(orthogonalize(&Matrix::zeros(3, 2)).is_err());
    }

    #[test]
    fn random_orthogonal_shapes() {
        let mut rng = Rng::new(4);
        let tall = random_orthogonal(10, 2, &mut rng).unwrap();
        assert!(qtq_error(&tall) <= 1e-12);
        let wide = random_orthogonal(2, 10, &mut rng).unwrap();
        assert!(qtq_error(&wide.transpose()) <= 1e-12);
    }

    #[test]
    fn spectral_norm_cases() {
        let mut rng = Rng::new(1);
        let tol = DEFAULT_SPECTRAL_TOL;
        let it = DEFAULT_SPECTRAL_MAX_ITER;
        let s = spectral_norm(&Matrix::identity(5), tol, it, &mut rng);
        assert!((s.value - 1.0).abs() < 1e-12 && s.converged);
        let s = spectral_norm(&Matrix::from_diag(&[3.0, 1.0]), tol, it, &mut rng);
        assert!((s.value - 3.0).abs() < 1e-7);
        let nil = Matrix::from_rows(&[&[0.0, 2.0], &[0.0, 0.0]]).unwrap();
        let s = spectral_norm(&nil, tol, it, &mut rng);
        assert!((s.value - 2.0).abs() < 1e-12);
        assert_eq!(spectral_norm(&Matrix::zeros(3, 3), tol, it, &mut rng).value, 0.0);
    }

    #[test]
    fn spectral_norm_flags_non_convergence() {
        // Equal top singular values with opposite signs make the iterate
        // oscillate only if the start is unlucky; a single iteration cannot
        // certify convergence.
        let m = Matrix::from_diag(&[1.0, 0.999_999, 0.5]);
        let s = spectral_norm(&m, 1e-15, 1, &mut Rng::new(2));
        assert!(!s.converged);
        assert!(s.value > 0.5 && s.value <= 1.0 + 1e-12);
    }

    #[test]
    fn spectral_norm_survives_extreme_scales() {
        let m = Matrix::from_diag(&[3e300, 1e300]);
        let s = spectral_norm(&m, 1e-10, 1000, &mut Rng::new(3));
        assert!((s.value / 3e300 - 1.0).abs() < 1e-9);
        let m = Matrix::from_diag(&[3e-300, 1e-300]);
        let s = spectral_norm(&m, 1e-10, 1000, &mut Rng::new(3));
        assert!((s.value / 3e-300 - 1.0).abs() < 1e-9);
    }
}
