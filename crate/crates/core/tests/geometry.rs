mod oracles;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rectiscan_core::datasets::{generate, GeneratorKind, GeneratorSpec};
use rectiscan_core::geometry::{alpha_coeff, beta1, AlphaConfig};
use rectiscan_core::transport::{flat_norm_distance, AtomSet};
use rectiscan_core::DiscreteMeasure;

fn as_pairs(m: &DiscreteMeasure) -> Vec<[f64; 2]> {
    m.points().map(|p| [p[0], p[1]]).collect()
}

fn circle(count: usize) -> DiscreteMeasure {
    generate(&GeneratorSpec::new(GeneratorKind::Circle { radius: 1.0 }, count, 2, 1)).unwrap()
}

fn atoms(points: &[[f64; 2]], masses: &[f64]) -> AtomSet {
    let mut s = AtomSet::new(2);
    for (p, &m) in points.iter().zip(masses) {
        s.push(p, m);
    }
    s
}

#[test]
fn beta1_on_a_circle_matches_brute_force() {
    let m = circle(4000);
    let idx = m.build_index();
    for (i, r) in [(0usize, 0.2), (1234, 0.2), (3000, 0.35)] {
        let x = m.point(i);
        let got = beta1(&m, &idx, x, r).unwrap().value;
        let oracle = oracles::brute_beta1(&as_pairs(&m), m.weights(), [x[0], x[1]], r);
        assert!((got - oracle).abs() <= 0.05 * oracle, "r = {r}: {got} vs {oracle}");
        assert!(got > 0.0 && got < r);
    }
}

#[test]
fn beta1_on_cantor_matches_brute_force() {
    let m = generate(&GeneratorSpec::new(GeneratorKind::Cantor4 { generation: 6 }, 1, 2, 1)).unwrap();
    let idx = m.build_index();
    let x = m.point(0);
    let got = beta1(&m, &idx, x, 0.25).unwrap().value;
    let oracle = oracles::brute_beta1(&as_pairs(&m), m.weights(), [x[0], x[1]], 0.25);
    assert!((got - oracle).abs() <= 0.05 * oracle, "{got} vs {oracle}");
    assert!(got >= 0.05, "{got}");
}

#[test]
fn two_atoms_deep_inside() {
    let a = 0.37;
    let (p, q) = ([0.1, -0.2], [0.35, 0.1]);
    let got = flat_norm_distance(&atoms(&[p], &[a]), &atoms(&[q], &[a]), &[0.0, 0.0], 10.0).unwrap();
    let d = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    assert!((got - a * d).abs() <= 1e-9);
    // near the boundary killing both atoms is cheaper than moving one
    let (p, q) = ([0.95, 0.0], [-0.9, 0.0]);
    let got = flat_norm_distance(&atoms(&[p], &[a]), &atoms(&[q], &[a]), &[0.0, 0.0], 1.0).unwrap();
    assert!((got - a * (0.05 + 0.1)).abs() <= 1e-9, "{got}");
}

#[test]
fn collinear_atoms_match_grid_search() {
    // σ: three atoms on the x-axis; ν: the same atoms moved by δ along it
    let eta = 1e-4;
    let delta = 0.0173;
    let xs_sigma = [-0.4, 0.05, 0.3];
    let m_sigma = [0.7, 1.3, 0.4];
    let m_nu = [0.9, 1.0, 0.6];
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for i in 0..3 {
        pts.push((xs_sigma[i], m_sigma[i]));
        pts.push((xs_sigma[i] + delta, -m_nu[i]));
    }
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let masses: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let bounds: Vec<f64> = xs.iter().map(|x| 0.6 - x.abs()).collect();
    let oracle = oracles::lp_on_a_line(&xs, &masses, &bounds, eta);
    let sigma: Vec<[f64; 2]> = xs_sigma.iter().map(|&x| [x, 0.0]).collect();
    let nu: Vec<[f64; 2]> = xs_sigma.iter().map(|&x| [x + delta, 0.0]).collect();
    let got = flat_norm_distance(&atoms(&sigma, &m_sigma), &atoms(&nu, &m_nu), &[0.0, 0.0], 0.6).unwrap();
    assert!((got - oracle).abs() <= 1e-6, "{got} vs {oracle}");
}

#[test]
fn planar_atoms_match_vertex_enumeration() {
    // σ: three atoms off a line; ν: their projections onto it, shifted by δ
    let delta = 0.04;
    let sigma = [[-0.3, 0.08], [0.1, -0.05], [0.4, 0.12]];
    let m_sigma = [0.5, 0.8, 0.3];
    let nu: Vec<[f64; 2]> = sigma.iter().map(|p| [p[0] + delta, 0.0]).collect();
    let m_nu = [0.6, 0.6, 0.5];
    let radius = 0.55;
    let got = flat_norm_distance(&atoms(&sigma, &m_sigma), &atoms(&nu, &m_nu), &[0.0, 0.0], radius).unwrap();
    let pts: Vec<[f64; 2]> = sigma.iter().copied().chain(nu.iter().copied()).collect();
    let masses: Vec<f64> = m_sigma.iter().copied().chain(m_nu.iter().map(|m| -m)).collect();
    let bounds: Vec<f64> = pts.iter().map(|p| radius - (p[0] * p[0] + p[1] * p[1]).sqrt()).collect();
    let oracle = oracles::lp_by_vertices(&pts, &masses, &bounds);
    assert!((got - oracle).abs() <= 1e-6, "{got} vs {oracle}");
}

fn random_atoms(rng: &mut ChaCha8Rng, count: usize) -> AtomSet {
    let mut s = AtomSet::new(2);
    for _ in 0..count {
        s.push(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)], rng.gen_range(0.1..1.0));
    }
    s
}

#[test]
fn metric_properties() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let c = [0.0, 0.0];
    for _ in 0..10 {
        let (a, b, e) = (random_atoms(&mut rng, 12), random_atoms(&mut rng, 9), random_atoms(&mut rng, 15));
        let ab = flat_norm_distance(&a, &b, &c, 1.2).unwrap();
        let ba = flat_norm_distance(&b, &a, &c, 1.2).unwrap();
        let ae = flat_norm_distance(&a, &e, &c, 1.2).unwrap();
        let eb = flat_norm_distance(&e, &b, &c, 1.2).unwrap();
        assert!(ab >= 0.0);
        assert!((ab - ba).abs() <= 1e-9);
        assert!(ab <= ae + eb + 1e-9);
        assert_eq!(flat_norm_distance(&a, &a, &c, 1.2).unwrap(), 0.0);
        let mut shrink = ab;
        for r in [1.0, 0.8, 0.5, 0.3] {
            let v = flat_norm_distance(&a, &b, &c, r).unwrap();
            assert!(v <= shrink + 1e-9);
            shrink = v;
        }
    }
}

#[test]
fn beta_and_alpha_scale_with_the_weights() {
    let m = circle(2000);
    let idx = m.build_index();
    let heavy = m.scale_weights(2.5).unwrap();
    let hidx = heavy.build_index();
    let x = m.point(100);
    let b = beta1(&m, &idx, x, 0.2).unwrap().value;
    assert!((beta1(&heavy, &hidx, x, 0.2).unwrap().value - 2.5 * b).abs() <= 1e-9 * b);
    let cfg = AlphaConfig::default();
    let a = alpha_coeff(&m, &idx, x, 0.2, &cfg).unwrap().value;
    let ah = alpha_coeff(&heavy, &hidx, x, 0.2, &cfg).unwrap().value;
    assert!((ah - 2.5 * a).abs() <= 1e-9 * a, "{ah} vs {}", 2.5 * a);
    assert!(a > 0.0 && a <= 0.2, "{a}");
}

#[test]
fn alpha_is_equivariant() {
    let m = circle(2000);
    let idx = m.build_index();
    let x = m.point(700).to_vec();
    let cfg = AlphaConfig::default();
    let a = alpha_coeff(&m, &idx, &x, 0.2, &cfg).unwrap().value;
    let theta: f64 = 0.83;
    let rot = [theta.cos(), -theta.sin(), theta.sin(), theta.cos()];
    let shift = [3.0, -1.25];
    let moved = m.transform(&rot, &shift).unwrap();
    let y = [rot[0] * x[0] + rot[1] * x[1] + shift[0], rot[2] * x[0] + rot[3] * x[1] + shift[1]];
    let b = alpha_coeff(&moved, &moved.build_index(), &y, 0.2, &cfg).unwrap().value;
    assert!((a - b).abs() <= 1e-6, "{a} vs {b}");
}

#[test]
fn alpha_sees_an_outlier() {
    // line sample plus one atom of mass m at height h
    let count = 401;
    let mut pts: Vec<Vec<f64>> = (0..count).map(|i| vec![-1.0 + 2.0 * i as f64 / (count - 1) as f64, 0.0]).collect();
    let mut w = vec![2.0 / count as f64; count];
    let (mass, h) = (0.02, 0.05);
    pts.push(vec![0.01, h]);
    w.push(mass);
    let m = DiscreteMeasure::from_points(&pts, w, 1).unwrap();
    let r = 0.3;
    let a = alpha_coeff(&m, &m.build_index(), &[0.0, 0.0], r, &AlphaConfig::default()).unwrap().value;
    assert!(a >= mass * h / (r * r) * (1.0 - 1e-9), "{a}");
}
