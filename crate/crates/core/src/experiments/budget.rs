use crate::error::{Error, Result};

/// Width chosen for a depth under a hidden-parameter budget `N_w = (d^2 + d) L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WidthPlan {
    pub budget: usize,
    pub depth: usize,
    /// Real root `d* = (-1 + sqrt(1 + 4 N_w / L)) / 2`.
    pub exact_width: f64,
    /// `d*` rounded to the nearest integer, at least 1.
    pub width: usize,
    /// `(d^2 + d) L` for the rounded width.
    pub actual_params: usize,
}

impl WidthPlan {
    /// Activations over parameters for the rounded network, `L d / ((d^2 + d) L)`.
    pub fn rho_actual(&self) -> f64 {
        (self.depth * self.width) as f64 / self.actual_params as f64
    }

    /// Activations of the rounded network over the nominal budget, `L d / N_w`.
    pub fn rho_budget(&self) -> f64 {
        (self.depth * self.width) as f64 / self.budget as f64
    }
}

fn check_budget(budget: usize, depth: usize) -> Result<()> {
    if depth == 0 || budget < 2 * depth {
        Err(Error::BudgetTooSmall { budget, depth })
    } else {
        Ok(())
    }
}

fn exact_width(budget: usize, depth: usize) -> f64 {
    (-1.0 + libm::sqrt(1.0 + 4.0 * budget as f64 / depth as f64)) / 2.0
}

/// Uniform width for `depth` hidden layers closest to the budget.
pub fn width_for_depth(budget: usize, depth: usize) -> Result<WidthPlan> {
    check_budget(budget, depth)?;
    let exact = exact_width(budget, depth);
    let width = (libm::round(exact) as usize).max(1);
    Ok(WidthPlan {
        budget,
        depth,
        exact_width: exact,
        width,
        actual_params: (width * width + width) * depth,
    })
}

/// Activation ratio `rho(L) = L d* / N_w = (-L + sqrt(L^2 + 4 L N_w)) / (2 N_w)`
/// with the real root `d*`.
pub fn activation_ratio(budget: usize, depth: usize) -> Result<f64> {
    check_budget(budget, depth)?;
    let (n, l) = (budget as f64, depth as f64);
    Ok((-l + libm::sqrt(l * l + 4.0 * l * n)) / (2.0 * n))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_integer_root() {
        let plan = width_for_depth(110, 1).unwrap();
        assert_eq!(plan.width, 10);
        assert_eq!(plan.exact_width, 10.0);
        assert_eq!(plan.actual_params, 110);
    }

    #[test]
    fn rounded_root() {
        let plan = width_for_depth(3300, 3).unwrap();
        // (-1 + sqrt(4401)) / 2 = 32.67001658...
        assert!((plan.exact_width - 32.670_016_581).abs() < 1e-6);
        assert_eq!(plan.width, 33);
        assert_eq!(plan.actual_params, 3366);
    }

    #[test]
    fn minimal_budget() {
        for l in [1, 7, 40] {
            let plan = width_for_depth(2 * l, l).unwrap();
            assert_eq!(plan.width, 1);
            assert_eq!(plan.actual_params, 2 * l);
        }
        assert_eq!(
            width_for_depth(5, 3).unwrap_err(),
            Error::BudgetTooSmall { budget: 5, depth: 3 }
        );
        assert!(activation_ratio(10, 0).is_err());
    }

    #[test]
    fn rounding_bound() {
        for budget in [100usize, 1600, 2400, 3200, 3300, 10_000] {
            for depth in 1..=budget / 2 {
                let p = width_for_depth(budget, depth).unwrap();
                let diff = (p.actual_params as i64 - budget as i64).unsigned_abs() as usize;
                assert!(diff <= (2 * p.width + 2) * depth, "budget {budget} depth {depth}");
            }
        }
    }

    #[test]
    fn ratio_values() {
        assert!((activation_ratio(110, 1).unwrap() - 1.0 / 11.0).abs() < 1e-15);
        assert!((activation_ratio(3300, 1650).unwrap() - 0.5).abs() < 1e-15);
        let plan = width_for_depth(110, 1).unwrap();
        assert!((plan.rho_actual() - 1.0 / 11.0).abs() < 1e-15);
    }

    #[test]
    fn ratio_strictly_increases() {
        let mut prev = 0.0;
        for l in 1..=1000 {
            let r = activation_ratio(3300, l).unwrap();
            assert!(r > prev, "L={l}");
            prev = r;
        }
    }
}
