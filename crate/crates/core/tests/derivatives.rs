//! Finite-difference checks of the input Jacobian, the G-matrix and the
//! parameter gradient, plus the exact mean-value identity for C-matrices.

use proptest::prelude::{prop_assert, proptest, ProptestConfig};
use varlab_core::analysis::{c_matrix, g_matrix};
use varlab_core::network::{forward, init_params, input_jacobian, loss_and_gradient};
use varlab_core::{Activation, Init, InitScheme, IoDims, Matrix, NetworkConfig, ParameterSet, Rng, Vector};

const KINK_GUARD: f64 = 1e-3;

fn random_vector(dim: usize, rng: &mut Rng) -> Vector {
    (0..dim).map(|_| rng.uniform_in(-1.0, 1.0)).collect::<Vec<_>>().into()
}

fn min_kink_distance(params: &ParameterSet, x: &Vector) -> f64 {
    if !params.activation().has_kink() {
        return f64::INFINITY;
    }
    let t = forward(params, x).unwrap();
    t.pre
        .iter()
        .chain(t.input_pre.iter())
        .flat_map(|z| z.iter().map(|v| v.abs()))
        .fold(f64::INFINITY, f64::min)
}

fn fd_jacobian(params: &ParameterSet, x: &Vector, h: f64) -> Matrix {
    let out_dim = params.config.output_dim();
    let mut j = Matrix::zeros(out_dim, x.dim());
    for c in 0..x.dim() {
        let mut xp = x.clone();
        let mut xm = x.clone();
        xp[c] += h;
        xm[c] -= h;
        let fp = forward(params, &xp).unwrap().output;
        let fm = forward(params, &xm).unwrap().output;
        for r in 0..out_dim {
            j.set(r, c, (fp[r] - fm[r]) / (2.0 * h));
        }
    }
    j
}

/// Relative comparison with a floor covering finite-difference roundoff
/// (`eps |F| / h`) and entries negligible next to the largest one.
fn assert_close_rel(got: &Matrix, want: &Matrix, out_scale: f64, tol: f64) {
    let floor = (1e-3 * want.max_abs()).max(1e-6 * (1.0 + out_scale));
    for r in 0..want.rows() {
        for c in 0..want.cols() {
            let (a, b) = (got.get(r, c), want.get(r, c));
            assert!((a - b).abs() <= tol * a.abs().max(b.abs()).max(floor), "({r},{c}): {a} vs {b}");
        }
    }
}

#[test]
fn jacobians_match_finite_differences() {
    let mut rng = Rng::new(2024);
    let mut checked = 0;
    while checked < 40 {
        let act = Activation::ALL[rng.below(3) as usize];
        let width = 1 + rng.below(8) as usize;
        let depth = 1 + rng.below(6) as usize;
        let extended = rng.bernoulli(0.5);
        let config = if extended {
            NetworkConfig::extended(depth, width, act, IoDims::PLANE)
        } else {
            NetworkConfig::hidden(depth, width, act)
        };
        let params = init_params(&config, &Init::new(InitScheme::Kaiming), &mut rng).unwrap();
        let x = random_vector(config.input_dim(), &mut rng);
        if min_kink_distance(&params, &x) < KINK_GUARD {
            continue;
        }
        let fd = fd_jacobian(&params, &x, 1e-5);
        let out_scale = forward(&params, &x).unwrap().output.norm();
        assert_close_rel(&input_jacobian(&params, &x).unwrap(), &fd, out_scale, 1e-4);
        if !extended {
            assert_close_rel(&g_matrix(&params, &x).unwrap().transpose(), &fd, out_scale, 1e-4);
        }
        checked += 1;
    }
}

#[test]
fn parameter_gradient_matches_finite_differences() {
    let mut rng = Rng::new(77);
    let mut checked = 0;
    while checked < 15 {
        let act = Activation::ALL[rng.below(3) as usize];
        let config = NetworkConfig::extended(1 + rng.below(4) as usize, 2 + rng.below(5) as usize, act, IoDims::PLANE);
        let params = init_params(&config, &Init::new(InitScheme::Xavier), &mut rng).unwrap();
        let batch: Vec<(Vector, Vector)> = (0..4)
            .map(|_| (random_vector(2, &mut rng), random_vector(2, &mut rng)))
            .collect();
        if batch.iter().any(|(x, _)| min_kink_distance(&params, x) < KINK_GUARD) {
            continue;
        }
        let (_, grad) = loss_and_gradient(&params, &batch).unwrap();
        let analytic: Vec<f64> = grad.values().copied().collect();
        let scale = analytic.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let h = 1e-5;
        for (k, &g) in analytic.iter().enumerate() {
            let shifted = |delta: f64| {
                let mut p = params.clone();
                *p.values_mut().nth(k).unwrap() += delta;
                loss_and_gradient(&p, &batch).unwrap().0
            };
            let fd = (shifted(h) - shifted(-h)) / (2.0 * h);
            let denom = g.abs().max(fd.abs()).max(1e-3 * scale);
            assert!((g - fd).abs() <= 1e-4 * denom, "coordinate {k}: {g} vs {fd}");
        }
        checked += 1;
    }
}

#[test]
fn zero_relu_network_has_zero_gradient() {
    let config = NetworkConfig::extended(3, 4, Activation::Relu, IoDims::PLANE);
    let params = ParameterSet::zeros(config);
    let batch = vec![(Vector::from([0.3, -0.2]), Vector::from([1.0, 1.0]))];
    let (loss, grad) = loss_and_gradient(&params, &batch).unwrap();
    assert_eq!(loss, 2.0);
    // Only the output bias sees a nonzero gradient; every upstream unit is dead.
    let out_bias: Vec<f64> = grad.output.as_ref().unwrap().bias.iter().copied().collect();
    assert_eq!(out_bias, vec![-2.0, -2.0]);
    let rest: f64 = grad.values().map(|v| v.abs()).sum::<f64>() - 4.0;
    assert_eq!(rest, 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn mean_value_identity(seed in 0u64..u64::MAX, act_idx in 0usize..3, width in 1usize..10, depth in 1usize..12) {
        let act = Activation::ALL[act_idx];
        let mut rng = Rng::new(seed);
        let params = init_params(&NetworkConfig::hidden(depth, width, act), &Init::new(InitScheme::Kaiming), &mut rng).unwrap();
        let x = random_vector(width, &mut rng);
        let xbar = random_vector(width, &mut rng);
        let c = c_matrix(&params, &x, &xbar).unwrap();
        let fx = forward(&params, &x).unwrap().output;
        let fb = forward(&params, &xbar).unwrap().output;
        let dx = x.sub(&xbar).unwrap();
        let mut worst = 0.0f64;
        for i in 0..width {
            let pred: f64 = (0..width).map(|r| c.get(r, i) * dx[r]).sum();
            worst = worst.max((fx[i] - fb[i] - pred).abs());
        }
        let scale = 1.0 + dx.norm();
        prop_assert!(worst / scale <= 1e-8 * (1.0 + fx.norm()));
    }

    #[test]
    fn positive_homogeneity(seed in 0u64..u64::MAX, c in 0.01f64..100.0, abs in proptest::bool::ANY) {
        let act = if abs { Activation::Abs } else { Activation::Relu };
        let mut rng = Rng::new(seed);
        let init = Init::new(InitScheme::Kaiming).with_bias_sigma(0.0);
        let params = init_params(&NetworkConfig::hidden(6, 5, act), &init, &mut rng).unwrap();
        let x = random_vector(5, &mut rng);
        let scaled: Vector = x.map(|t| c * t);
        let a = forward(&params, &scaled).unwrap().output;
        let b = forward(&params, &x).unwrap().output.map(|t| c * t);
        prop_assert!(a.sub(&b).unwrap().norm() <= 1e-10 * b.norm().max(1e-300));
    }
}

#[test]
fn kaiming_relu_preserves_signal_scale() {
    let init = Init::new(InitScheme::Kaiming).with_bias_sigma(0.0);
    let mut ratios: Vec<f64> = (0..100)
        .map(|seed| {
            let mut rng = Rng::new(seed);
            let params = init_params(&NetworkConfig::hidden(10, 256, Activation::Relu), &init, &mut rng).unwrap();
            let x = random_vector(256, &mut rng);
            forward(&params, &x).unwrap().output.norm() / x.norm()
        })
        .collect();
    ratios.sort_by(f64::total_cmp);
    let median = 0.5 * (ratios[49] + ratios[50]);
    assert!((0.3..=3.0).contains(&median), "median ratio {median}");
}
