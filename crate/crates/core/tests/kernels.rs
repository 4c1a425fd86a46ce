mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rectiscan_core::kernels::{convex_weight, d_phi, dk_phi, phi_t, KernelSpec};

fn smooth_specs() -> Vec<KernelSpec> {
    vec![
        KernelSpec::gaussian(1, 1).unwrap(),
        KernelSpec::gaussian(2, 1).unwrap(),
        KernelSpec::gaussian(3, 2).unwrap(),
        KernelSpec::inverse_power(1.0, 1).unwrap(),
        KernelSpec::inverse_power(2.0, 2).unwrap(),
        KernelSpec::inverse_power(1.3, 2).unwrap(),
    ]
}

/// Relative error against the oracle, floored at 1e-3·φ_t(0) = 1e-3·t^{-n}
/// so sign changes of the kernel do not divide by zero.
fn rel_error(got: f64, oracle: f64, t: f64, n: usize) -> f64 {
    (got - oracle).abs() / oracle.abs().max(1e-3 * t.powi(-(n as i32)))
}

fn random_grid(seed: u64, count: usize) -> Vec<(KernelSpec, [f64; 2], f64)> {
    let specs = smooth_specs();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|i| {
            let spec = specs[i % specs.len()];
            let t: f64 = rng.gen_range(0.05..4.0);
            let x = [rng.gen_range(-2.5..2.5) * t, rng.gen_range(-1.0..1.0) * t * (spec.target_dim() - 1) as f64];
            (spec, x, t)
        })
        .collect()
}

#[test]
fn d_phi_matches_finite_differences() {
    let mut worst: f64 = 0.0;
    for (spec, x, t) in random_grid(1, 100) {
        let oracle = oracles::scaled_t_derivative(|s| phi_t(&spec, &x, s).unwrap(), t, 1);
        worst = worst.max(rel_error(d_phi(&spec, &x, t).unwrap(), oracle, t, spec.target_dim()));
    }
    assert!(worst <= 1e-6, "worst relative error {worst:e}");
}

#[test]
fn dk_phi_matches_finite_differences() {
    for k in 1..=3 {
        let mut worst: f64 = 0.0;
        for (spec, x, t) in random_grid(10 + k as u64, 100) {
            let oracle = oracles::scaled_t_derivative(|s| phi_t(&spec, &x, s).unwrap(), t, k);
            worst = worst.max(rel_error(dk_phi(&spec, &x, t, k).unwrap(), oracle, t, spec.target_dim()));
        }
        assert!(worst <= 1e-5, "k = {k}: worst relative error {worst:e}");
    }
}

#[test]
fn nested_differences_of_lower_orders() {
    // t^k ∂_t^k = (t∂_t − (k−1)) t^{k−1}∂_t^{k−1}
    for (spec, x, t) in random_grid(20, 40) {
        for k in 2..=4 {
            let inner = |s: f64| dk_phi(&spec, &x, s, k - 1).unwrap();
            let nested = oracles::scaled_t_derivative(inner, t, 1) - (k - 1) as f64 * inner(t);
            let got = dk_phi(&spec, &x, t, k).unwrap();
            assert!(rel_error(got, nested, t, spec.target_dim()) <= 1e-4, "{spec:?} k={k}");
        }
    }
}

#[test]
fn first_order_derivative_kernels_agree() {
    for (spec, x, t) in random_grid(30, 50) {
        assert_eq!(dk_phi(&spec, &x, t, 1).unwrap(), d_phi(&spec, &x, t).unwrap());
    }
}

#[test]
fn convex_weight_reproduces_the_gaussian() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    for i in 0..20 {
        let n = 1 + i % 3;
        let radius: f64 = rng.gen_range(0.1..5.0);
        let s = rng.gen_range(0.0..2.5) * radius;
        let tail = oracles::simpson(|r| convex_weight(radius, r, n) * r.powi(-(n as i32)), s, s + 14.0 * radius, 20_000);
        let exact = radius.powi(-(n as i32)) * (-(s / radius).powi(2)).exp();
        assert!((tail - exact).abs() <= 1e-8 * radius.powi(-(n as i32)), "n={n} R={radius} s={s}: {tail} vs {exact}");
    }
}

#[test]
fn convex_weight_examples() {
    let radius = 0.7;
    let from_zero = oracles::simpson(|r| convex_weight(radius, r, 1) / r.max(1e-300), 1e-9, 12.0 * radius, 20_000);
    assert!((from_zero - 1.0 / radius).abs() <= 1e-8);
    let from_r = oracles::simpson(|r| convex_weight(radius, r, 1) / r, radius, 12.0 * radius, 20_000);
    assert!((from_r - (-1.0f64).exp() / radius).abs() <= 1e-8);
    // ∫φ̃_R = Γ(3/2) = √π/2 for n = 1, independent of R
    for radius in [0.01, 1.0, 30.0] {
        let mass = oracles::simpson(|r| convex_weight(radius, r, 1), 0.0, 12.0 * radius, 20_000);
        assert!((mass - std::f64::consts::PI.sqrt() / 2.0).abs() < 1e-9, "{mass}");
    }
}

#[test]
fn radial_and_scale_covariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for spec in smooth_specs() {
        for _ in 0..10 {
            let x = [rng.gen_range(-2.0..2.0), rng.gen_range(-2.0..2.0)];
            let (t, lambda): (f64, f64) = (rng.gen_range(0.1..2.0), rng.gen_range(0.2..5.0));
            let theta: f64 = rng.gen_range(0.0..6.28);
            let y = [x[0] * theta.cos() - x[1] * theta.sin(), x[0] * theta.sin() + x[1] * theta.cos()];
            let a = phi_t(&spec, &x, t).unwrap();
            assert!((phi_t(&spec, &y, t).unwrap() - a).abs() <= 1e-12 * a.abs().max(1e-300));
            let scaled = phi_t(&spec, &[lambda * x[0], lambda * x[1]], lambda * t).unwrap();
            let expected = lambda.powi(-(spec.target_dim() as i32)) * a;
            assert!((scaled - expected).abs() <= 1e-12 * expected.abs().max(1e-300));
        }
    }
}
