use crate::error::{invalid, Error, Result};

/// Default cut-off below which a sample counts as zero in [`geometric_mean`].
pub const DEFAULT_ZERO_THRESHOLD: f64 = 1e-30;

/// Geometric mean computed in log space; any value below `zero_threshold`
/// makes the whole mean zero.
pub fn geometric_mean(xs: &[f64], zero_threshold: f64) -> Result<f64> {
    if xs.is_empty() {
        return Err(Error::Empty("geometric_mean"));
    }
    if xs.iter().any(|&x| !(x >= 0.0)) {
        return Err(invalid("geometric_mean: values must be nonnegative"));
    }
    if xs.iter().any(|&x| x < zero_threshold) {
        return Ok(0.0);
    }
    if let [x] = xs {
        return Ok(*x);
    }
    let mean_log = xs.iter().map(|&x| libm::log(x)).sum::<f64>() / xs.len() as f64;
    Ok(libm::exp(mean_log))
}

/// Arithmetic mean and unbiased sample variance (0 for a single value).
pub fn mean_and_variance(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = xs.len() as f64;
    // Shifted by the first value so identical inputs give an exact mean.
    let x0 = xs[0];
    let mean = x0 + xs.iter().map(|x| x - x0).sum::<f64>() / n;
    if xs.len() == 1 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var)
}

/// Median of a slice (mean of the middle pair for even lengths). NaNs sort last.
pub fn median(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let mut v = alloc::vec::Vec::from(xs);
    v.sort_by(|a, b| a.total_cmp(b));
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::E;

    #[test]
    fn geometric_mean_cases() {
        assert!((geometric_mean(&[1.0, 4.0], 0.0).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(geometric_mean(&[1.0, 0.0, 9.0], 1e-30).unwrap(), 0.0);
        assert!((geometric_mean(&[E, E, E], 1e-30).unwrap() - E).abs() < 1e-15);
    }

    #[test]
    fn geometric_mean_rejects_bad_input() {
        assert_eq!(geometric_mean(&[], 0.0), Err(Error::Empty("geometric_mean")));
        assert!(geometric_mean(&[1.0, -1.0], 0.0).is_err());
        assert!(geometric_mean(&[f64::NAN], 0.0).is_err());
    }

    #[test]
    fn geometric_mean_handles_huge_values() {
        let g = geometric_mean(&[1e300, 1e300, 1e-300], 1e-320).unwrap();
        assert!((g / 1e100 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_of_identical_values_is_zero() {
        assert_eq!(mean_and_variance(&[0.7, 0.7, 0.7]), (0.7, 0.0));
        assert_eq!(mean_and_variance(&[2.0]).1, 0.0);
        let (m, v) = mean_and_variance(&[1.0, 2.0, 3.0]);
        assert_eq!((m, v), (2.0, 1.0));
    }

    #[test]
    fn median_cases() {
        assert_eq!(median(&[3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]), 2.5);
    }
}
