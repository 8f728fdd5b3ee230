use crate::error::{invalid, Result};
use crate::network::Activation;
use crate::numerics::Rng;

fn check_args(p: f64, d: usize, act: Activation) -> Result<()> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid("probability p must lie in (0, 1)"));
    }
    if d == 0 {
        return Err(invalid("dimension must be at least 1"));
    }
    if act == Activation::Sigmoid {
        return Err(invalid("distance preservation is defined for relu and abs only"));
    }
    Ok(())
}

/// Probability that `|phi(u) - phi(v)| = |u - v|` componentwise when every
/// component of `u` and `v` is independently nonnegative with probability `p`:
/// `p^(2d)` for ReLU and `(p^2 + (1-p)^2)^d` for abs.
pub fn preserve_probability_closed(p: f64, d: usize, act: Activation) -> Result<f64> {
    check_args(p, d, act)?;
    let per_component = match act {
        Activation::Relu => p * p,
        Activation::Abs => p * p + (1.0 - p) * (1.0 - p),
        Activation::Sigmoid => unreachable!(),
    };
    Ok(libm::pow(per_component, d as f64))
}

/// Monte-Carlo estimate of [`preserve_probability_closed`].
///
/// Each component is `+|N(0,1)|` with probability `p` and `-|N(0,1)|`
/// otherwise. A trial succeeds when every component satisfies
/// `|phi(u_i) - phi(v_i)| == |u_i - v_i|` exactly.
pub fn preserve_probability_mc(p: f64, d: usize, act: Activation, trials: usize, rng: &mut Rng) -> Result<f64> {
    check_args(p, d, act)?;
    if trials == 0 {
        return Err(invalid("trials must be positive"));
    }
    let draw = |rng: &mut Rng| {
        let magnitude = rng.standard_normal().abs();
        if rng.bernoulli(p) {
            magnitude
        } else {
            -magnitude
        }
    };
    let mut hits = 0usize;
    for _ in 0..trials {
        let mut preserved = true;
        for _ in 0..d {
            let u = draw(rng);
            let v = draw(rng);
            if (act.apply(u) - act.apply(v)).abs() != (u - v).abs() {
                preserved = false;
            }
        }
        if preserved {
            hits += 1;
        }
    }
    Ok(hits as f64 / trials as f64)
}

/// Four binomial standard deviations of a frequency estimate over `trials`.
pub fn four_sigma(prob: f64, trials: usize) -> f64 {
    4.0 * libm::sqrt(prob * (1.0 - prob) / trials as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_anchors() {
        let c = |p, d, a| preserve_probability_closed(p, d, a).unwrap();
        assert_eq!(c(0.5, 1, Activation::Relu), 0.25);
        assert_eq!(c(0.5, 1, Activation::Abs), 0.5);
        assert_eq!(c(0.25, 1, Activation::Relu), 1.0 / 16.0);
        assert_eq!(c(0.25, 1, Activation::Abs), 10.0 / 16.0);
        assert_eq!(c(0.5, 3, Activation::Relu), 1.0 / 64.0);
        assert_eq!(c(0.5, 3, Activation::Abs), 1.0 / 8.0);
    }

    #[test]
    fn abs_dominates_relu() {
        for i in 1..100 {
            let p = i as f64 / 100.0;
            for d in 1..6 {
                let r = preserve_probability_closed(p, d, Activation::Relu).unwrap();
                let a = preserve_probability_closed(p, d, Activation::Abs).unwrap();
                assert!(a > r, "p={p} d={d}");
            }
        }
    }

    #[test]
    fn invalid_arguments() {
        assert!(preserve_probability_closed(0.0, 1, Activation::Relu).is_err());
        assert!(preserve_probability_closed(1.0, 1, Activation::Relu).is_err());
        assert!(preserve_probability_closed(0.5, 0, Activation::Relu).is_err());
        assert!(preserve_probability_closed(0.5, 1, Activation::Sigmoid).is_err());
        assert!(preserve_probability_mc(0.5, 1, Activation::Relu, 0, &mut Rng::new(1)).is_err());
    }

    #[test]
    fn monte_carlo_matches_closed_form() {
        let trials = 1_000_000;
        let mut rng = Rng::new(99);
        let mc = preserve_probability_mc(0.5, 1, Activation::Relu, trials, &mut rng).unwrap();
        assert!((mc - 0.25).abs() <= four_sigma(0.25, trials));
        let mc = preserve_probability_mc(0.5, 2, Activation::Abs, trials, &mut rng).unwrap();
        assert!((mc - 0.25).abs() <= four_sigma(0.25, trials));
    }

    #[test]
    fn near_certain_positivity() {
        let mc = preserve_probability_mc(0.999, 1, Activation::Relu, 10_000, &mut Rng::new(4)).unwrap();
        assert!(mc >= 0.99);
    }
}
