use core::fmt;
use core::str::FromStr;

use crate::error::{invalid, Error};

/// Scalar activation applied componentwise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Activation {
    /// `1 / (1 + e^{-t})`
    Sigmoid,
    /// `max(0, t)`
    Relu,
    /// `|t|`
    Abs,
}

impl Activation {
    pub const ALL: [Activation; 3] = [Activation::Sigmoid, Activation::Relu, Activation::Abs];

    #[inline]
    pub fn apply(self, t: f64) -> f64 {
        match self {
            Activation::Sigmoid => sigmoid(t),
            Activation::Relu => {
                if t > 0.0 {
                    t
                } else {
                    0.0
                }
            }
            Activation::Abs => t.abs(),
        }
    }

    /// Derivative, with `phi'(0) = 0` at the ReLU and abs kinks.
    #[inline]
    pub fn derivative(self, t: f64) -> f64 {
        match self {
            Activation::Sigmoid => {
                let s = sigmoid(t);
                s * (1.0 - s)
            }
            Activation::Relu => {
                if t > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Abs => {
                if t > 0.0 {
                    1.0
                } else if t < 0.0 {
                    -1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Whether the activation has a non-differentiable point at 0.
    pub fn has_kink(self) -> bool {
        !matches!(self, Activation::Sigmoid)
    }

    pub fn name(self) -> &'static str {
        match self {
            Activation::Sigmoid => "sigmoid",
            Activation::Relu => "relu",
            Activation::Abs => "abs",
        }
    }
}

// Branch on the sign so exp never overflows.
#[inline]
fn sigmoid(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + libm::exp(-t))
    } else {
        let e = libm::exp(t);
        e / (1.0 + e)
    }
}

impl fmt::Display for Activation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Activation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sigmoid" => Ok(Activation::Sigmoid),
            "relu" => Ok(Activation::Relu),
            "abs" | "absolute" => Ok(Activation::Abs),
            other => Err(invalid(alloc::format!("unknown activation '{other}'"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(Activation::Relu.apply(-2.0), 0.0);
        assert_eq!(Activation::Relu.apply(3.0), 3.0);
        assert_eq!(Activation::Abs.apply(-2.0), 2.0);
        assert_eq!(Activation::Sigmoid.apply(0.0), 0.5);
    }

    #[test]
    fn sigmoid_is_stable_at_extremes() {
        assert_eq!(Activation::Sigmoid.apply(800.0), 1.0);
        assert_eq!(Activation::Sigmoid.apply(-800.0), 0.0);
        assert!(Activation::Sigmoid.derivative(-800.0).is_finite());
        let t: f64 = 0.3;
        let s = 1.0 / (1.0 + (-t).exp());
        assert!((Activation::Sigmoid.apply(t) - s).abs() < 1e-15);
        assert!((Activation::Sigmoid.apply(-t) - (1.0 - s)).abs() < 1e-15);
    }

    #[test]
    fn kink_derivative_is_zero() {
        assert_eq!(Activation::Relu.derivative(0.0), 0.0);
        assert_eq!(Activation::Abs.derivative(0.0), 0.0);
        assert_eq!(Activation::Abs.derivative(-0.5), -1.0);
    }

    #[test]
    fn parse_round_trip() {
        for a in Activation::ALL {
            assert_eq!(a.name().parse::<Activation>().unwrap(), a);
        }
        assert!("tanh".parse::<Activation>().is_err());
    }
}
