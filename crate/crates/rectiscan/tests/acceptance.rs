//! Acceptance run: one PASS/FAIL line per criterion with the measured values
//! underneath. The process fails when a check fails that is not listed in
//! `KNOWN_FAILURES`; those are reported as FAIL all the same.

#[path = "../../core/tests/oracles/mod.rs"]
mod oracles;

use std::fs;
use std::path::Path;
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rectiscan::cli::{
    reconstruction_samples, LARGE_LEVELS, RECONSTRUCTION_TOLERANCE, SLOPE_TOLERANCE, SMALL_LEVELS, ZERO_TOLERANCE,
};
use rectiscan::parallel;
use rectiscan_core::datasets::{generate, GeneratorKind, GeneratorSpec, GraphProfile};
use rectiscan_core::geometry::{beta1, interior_cube, AlphaConfig};
use rectiscan_core::kernels::{convex_weight, d_phi, dk_phi, phi_t, KernelSpec};
use rectiscan_core::lattice::build_lattice;
use rectiscan_core::measure::{min_spacing, ratio_grid};
use rectiscan_core::sampling::sample_centers;
use rectiscan_core::square::{carleson_norm, square_function_at, Ball, CarlesonOptions, EdgeModel, Functional, ScaleGrid};
use rectiscan_core::transport::{flat_norm_distance, AtomSet};
use rectiscan_core::uniformity::{uniformity_identity_check, wcd_defect, WcdConfig};
use rectiscan_core::wavelet::{cascade_tables, h_coefficient, reconstruction_check, zero_cubes};
use rectiscan_core::DiscreteMeasure;

/// Checks that fail with the specified setup; the reasons are printed with
/// the measurements and explained in the README.
const KNOWN_FAILURES: &[&str] = &["2.cantor.delta-density", "2.cantor.delta-smooth", "7.large.n1", "7.large.n2"];

// criterion 1
const PLANE_TOLERANCE_FACTOR: f64 = 5.0;
const PLANE_RUNTIME_SECS: f64 = 60.0;
/// Kernel mass allowed past the data edge for a cell to count as interior.
const INTERIOR_TAIL: f64 = 1e-6;
// criterion 2
const GRAPH_SLOPE_MAX: f64 = 0.02;
const GRAPH_SUP_FACTOR: f64 = 10.0;
const CANTOR_SLOPE_MIN: f64 = 0.05;
const CANTOR_CORRELATION_MIN: f64 = 0.9;
const CARLESON_RUNTIME_SECS: f64 = 600.0;
// criterion 3: frozen from seeds 100..=105 (largest ratio 0.167); the
// continuum bound from the layer-cake identity is Γ(3/2)² = π/4
const DOMINATION_C: f64 = 0.25;
const DOMINATION_FLOOR: f64 = 1e-6;
// criterion 4
const KERNEL_FD_TOLERANCE: f64 = 1e-5;
const CONVEX_WEIGHT_TOLERANCE: f64 = 1e-8;
// criterion 5
const BETA_TOLERANCE: f64 = 0.05;
const LP_EXACT_TOLERANCE: f64 = 1e-9;
const LP_GRID_TOLERANCE: f64 = 1e-6;
const SEGMENT_PACKING_MAX: f64 = 0.1;
const GRAPH_PACKING_GROWTH_MAX: f64 = 1.2;
const CANTOR_PACKING_SLOPE_MIN: f64 = 0.02;
// criterion 6
const SEGMENT_WCD_MAX: f64 = 0.02;
const SEGMENT_C1: (f64, f64) = (1.9, 2.1);
const CANTOR_WCD_MIN: f64 = 0.1;
const UNIFORMITY_MAX: f64 = 0.01;

struct Check {
    id: String,
    passed: bool,
    detail: String,
}

fn check(id: &str, passed: bool, detail: String) -> Check {
    Check { id: id.to_string(), passed, detail }
}

fn segment(count: usize) -> DiscreteMeasure {
    generate(&GeneratorSpec::new(GeneratorKind::Segment { length: 1.0 }, count, 2, 1)).unwrap()
}

fn graph(count: usize) -> DiscreteMeasure {
    let kind = GeneratorKind::LipschitzGraph {
        amplitude: 0.3,
        frequency: 1.0,
        profile: GraphProfile::Sine,
        length: 1.0,
        small_constant: false,
    };
    generate(&GeneratorSpec::new(kind, count, 2, 1)).unwrap()
}

fn cantor(generation: u32) -> DiscreteMeasure {
    generate(&GeneratorSpec::new(GeneratorKind::Cantor4 { generation }, 1, 2, 1)).unwrap()
}

fn plane_annihilation() -> Vec<Check> {
    let start = Instant::now();
    let g = |n| KernelSpec::gaussian(1, n).unwrap();
    let mut out = Vec::new();
    let cases = [
        ("segment", segment(10_001), 50usize),
        ("plane", generate(&GeneratorSpec::new(GeneratorKind::Plane { side: 1.0 }, 40_401, 3, 2)).unwrap(), 101),
    ];
    for (name, m, stride) in cases {
        let n = m.target_dim();
        let idx = m.build_index();
        let edges = EdgeModel::new(&m);
        let spacing = min_spacing(&m).unwrap();
        let grid = ScaleGrid::new(&m, 10.0 * spacing, m.diameter() / 10.0, 2f64.sqrt()).unwrap();
        let spec = g(n);
        let m_tail = spec.tail_radius(INTERIOR_TAIL);
        let mut functionals: Vec<(Functional, f64)> = vec![(Functional::DeltaDensity, 2.0)];
        for k in 1..=3usize {
            let wide = (1u64 << k) as f64;
            functionals.push((Functional::DeltaSmoothK(spec, k), m_tail * wide));
            functionals.push((Functional::DeltaSmoothDtK(spec, k), m_tail));
        }
        let (mut worst, mut cells) = (0.0f64, 0usize);
        for c in (0..m.len()).step_by(stride) {
            let edge = edges.distance(m.point(c));
            for &r in &grid.scales {
                for (f, reach) in &functionals {
                    if edge < reach * r {
                        continue;
                    }
                    let v = f.evaluate(&m, &idx, c, r).unwrap();
                    worst = worst.max(v.abs() * r / spacing);
                    cells += 1;
                }
            }
        }
        out.push(check(
            &format!("1.{name}"),
            worst <= PLANE_TOLERANCE_FACTOR && cells > 0,
            format!(
                "{name} (n = {n}, {} points, spacing {spacing:.3e}): max |v|·r/spacing = {worst:.3e} over {cells} interior cells, scales {:.3e}..{:.3e}",
                m.len(),
                grid.scales[0],
                grid.scales[grid.scales.len() - 1]
            ),
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    out.push(check("1.runtime", secs <= PLANE_RUNTIME_SECS, format!("runtime {secs:.1} s")));
    out
}

fn carleson_dichotomy() -> Vec<Check> {
    let start = Instant::now();
    let opts = CarlesonOptions { exclude_flagged: true };
    let mut out = Vec::new();
    let functionals =
        [("delta-density", Functional::DeltaDensity), ("delta-smooth", Functional::DeltaSmooth(KernelSpec::gaussian(1, 1).unwrap()))];
    let run = |m: &DiscreteMeasure, f: &Functional, r_min: f64, center: usize, radii: &[f64]| {
        let idx = m.build_index();
        let grid = ScaleGrid::new(m, r_min, radii[0], 2f64.sqrt()).unwrap();
        let centers = sample_centers(m, 5000, 7);
        let field = parallel::coefficient_field(m, &idx, f.clone(), centers, grid).unwrap();
        let x0 = m.point(center).to_vec();
        let balls: Vec<Ball> = radii.iter().map(|&r| Ball { center: x0.clone(), radius: r }).collect();
        carleson_norm(&field, m, &balls, opts).unwrap()
    };
    let quarters: Vec<f64> = (1..=4).map(|k| 0.25f64.powi(k)).collect();
    let (seg, gr, can) = (segment(10_001), graph(14_001), cantor(8));
    for (name, f) in &functionals {
        let s = run(&seg, f, 10.0 * min_spacing(&seg).unwrap(), seg.len() / 2, &quarters);
        let g = run(&gr, f, 10.0 * min_spacing(&gr).unwrap(), gr.len() / 2, &quarters);
        let g_ok = g.slope.abs() <= GRAPH_SLOPE_MAX && g.sup <= GRAPH_SUP_FACTOR * s.sup;
        out.push(check(
            &format!("2.graph.{name}"),
            g_ok,
            format!(
                "{name} graph: slope {:.4} per octave, sup V {:.4e} = {:.2}x segment sup {:.4e}",
                g.slope,
                g.sup,
                g.sup / s.sup,
                s.sup
            ),
        ));
        let radii: Vec<f64> = (0..=4).map(|k| 0.25f64.powi(k)).collect();
        let c = run(&can, f, can.resolution(), 0, &radii);
        let values: Vec<String> = c.records.iter().map(|r| format!("{:.4}", r.value)).collect();
        out.push(check(
            &format!("2.cantor.{name}"),
            c.slope >= CANTOR_SLOPE_MIN && c.correlation >= CANTOR_CORRELATION_MIN,
            format!(
                "{name} Cantor K=8: slope {:.4} per octave (need ≥ {CANTOR_SLOPE_MIN}), correlation {:.3}, V = [{}] for R = 1..4^-4",
                c.slope,
                c.correlation,
                values.join(", ")
            ),
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    out.push(check("2.runtime", secs <= CARLESON_RUNTIME_SECS, format!("runtime {secs:.1} s")));
    out
}

fn domination() -> Vec<Check> {
    let smooth = Functional::DeltaSmooth(KernelSpec::gaussian(1, 1).unwrap());
    let (mut worst, mut passed, mut total) = (0.0f64, 0usize, 0usize);
    for seed in 0..20 {
        let kind = GeneratorKind::PerturbedPlane { side: 1.0, noise: 2e-3 };
        let m = generate(&GeneratorSpec::new(kind, 2001, 2, 1).with_seed(seed)).unwrap();
        let idx = m.build_index();
        let res = m.resolution();
        let dens_grid = ScaleGrid::new(&m, 2.0 * res, 0.5, 2f64.sqrt()).unwrap();
        let smooth_grid = ScaleGrid::new(&m, 4.0 * res, 0.05, 2f64.sqrt()).unwrap();
        for c in (0..25).map(|k| 700 + 25 * k) {
            let s = square_function_at(&m, &idx, &smooth, c, &smooth_grid).unwrap();
            let d = square_function_at(&m, &idx, &Functional::DeltaDensity, c, &dens_grid).unwrap();
            total += 1;
            if s <= DOMINATION_C * d + DOMINATION_FLOOR {
                passed += 1;
            }
            if d > 0.0 {
                worst = worst.max(s / d);
            }
        }
    }
    vec![check(
        "3.domination",
        passed == total,
        format!("{passed}/{total} centers satisfy S_smooth ≤ {DOMINATION_C}·S_density + 1e-6; largest ratio {worst:.4}"),
    )]
}

fn kernel_identities() -> Vec<Check> {
    let specs = [
        KernelSpec::gaussian(1, 1).unwrap(),
        KernelSpec::gaussian(2, 1).unwrap(),
        KernelSpec::gaussian(3, 2).unwrap(),
        KernelSpec::inverse_power(1.0, 1).unwrap(),
        KernelSpec::inverse_power(2.0, 2).unwrap(),
        KernelSpec::inverse_power(1.3, 2).unwrap(),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let grid: Vec<(KernelSpec, [f64; 2], f64)> = (0..100)
        .map(|i| {
            let spec = specs[i % specs.len()];
            let t: f64 = rng.gen_range(0.05..4.0);
            let x = [rng.gen_range(-2.5..2.5) * t, rng.gen_range(-1.0..1.0) * t * (spec.target_dim() - 1) as f64];
            (spec, x, t)
        })
        .collect();
    // relative error floored at 1e-3·φ_t(0) so zero crossings do not divide by zero
    let rel = |got: f64, oracle: f64, t: f64, n: usize| (got - oracle).abs() / oracle.abs().max(1e-3 * t.powi(-(n as i32)));
    let mut worst = [0.0f64; 4];
    for (spec, x, t) in &grid {
        let n = spec.target_dim();
        let f = |s: f64| phi_t(spec, x, s).unwrap();
        worst[0] = worst[0].max(rel(d_phi(spec, x, *t).unwrap(), oracles::scaled_t_derivative(f, *t, 1), *t, n));
        for k in 1..=3 {
            let oracle = oracles::scaled_t_derivative(f, *t, k);
            worst[k] = worst[k].max(rel(dk_phi(spec, x, *t, k).unwrap(), oracle, *t, n));
        }
    }
    let mut convex_worst = 0.0f64;
    for i in 0..20 {
        let n = 1 + i % 3;
        let radius: f64 = rng.gen_range(0.1..5.0);
        let s = rng.gen_range(0.0..2.5) * radius;
        let tail = oracles::simpson(|r| convex_weight(radius, r, n) * r.powi(-(n as i32)), s, s + 14.0 * radius, 20_000);
        let exact = radius.powi(-(n as i32)) * (-(s / radius).powi(2)).exp();
        convex_worst = convex_worst.max((tail - exact).abs() / radius.powi(-(n as i32)));
    }
    vec![
        check(
            "4.derivatives",
            worst.iter().all(|&w| w <= KERNEL_FD_TOLERANCE),
            format!(
                "worst relative error vs finite differences on 100 points: d_phi {:.2e}, dk_phi k=1 {:.2e}, k=2 {:.2e}, k=3 {:.2e}",
                worst[0], worst[1], worst[2], worst[3]
            ),
        ),
        check(
            "4.convex-weight",
            convex_worst <= CONVEX_WEIGHT_TOLERANCE,
            format!("reproducing identity at 20 (s, R) pairs: worst error {convex_worst:.2e} (units of R^-n)"),
        ),
    ]
}

fn atoms(points: &[[f64; 2]], masses: &[f64]) -> AtomSet {
    let mut s = AtomSet::new(2);
    for (p, &m) in points.iter().zip(masses) {
        s.push(p, m);
    }
    s
}

fn alpha_beta() -> Vec<Check> {
    let mut out = Vec::new();
    let pairs = |m: &DiscreteMeasure| -> Vec<[f64; 2]> { m.points().map(|p| [p[0], p[1]]).collect() };
    let circle = generate(&GeneratorSpec::new(GeneratorKind::Circle { radius: 1.0 }, 4000, 2, 1)).unwrap();
    let can6 = cantor(6);
    let mut beta_worst = 0.0f64;
    let mut beta_detail = Vec::new();
    for (name, m, i, r) in [("circle", &circle, 0usize, 0.2), ("circle", &circle, 1234, 0.2), ("cantor", &can6, 0, 0.25)] {
        let x = m.point(i);
        let got = beta1(m, &m.build_index(), x, r).unwrap().value;
        let oracle = oracles::brute_beta1(&pairs(m), m.weights(), [x[0], x[1]], r);
        let err = (got - oracle).abs() / oracle;
        beta_worst = beta_worst.max(err);
        beta_detail.push(format!("{name} {got:.5} vs {oracle:.5}"));
    }
    out.push(check(
        "5.beta1",
        beta_worst <= BETA_TOLERANCE,
        format!("β₁ vs 721×201 line search: {}; worst relative gap {beta_worst:.4}", beta_detail.join(", ")),
    ));

    let (a, p, q) = (0.37, [0.1, -0.2], [0.35, 0.1]);
    let two = flat_norm_distance(&atoms(&[p], &[a]), &atoms(&[q], &[a]), &[0.0, 0.0], 10.0).unwrap();
    let two_err = (two - a * ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt()).abs();
    let delta = 0.04;
    let sigma = [[-0.3, 0.08], [0.1, -0.05], [0.4, 0.12]];
    let (m_sigma, m_nu) = ([0.5, 0.8, 0.3], [0.6, 0.6, 0.5]);
    let nu: Vec<[f64; 2]> = sigma.iter().map(|p| [p[0] + delta, 0.0]).collect();
    let lp = flat_norm_distance(&atoms(&sigma, &m_sigma), &atoms(&nu, &m_nu), &[0.0, 0.0], 0.55).unwrap();
    let pts: Vec<[f64; 2]> = sigma.iter().copied().chain(nu.iter().copied()).collect();
    let masses: Vec<f64> = m_sigma.iter().copied().chain(m_nu.iter().map(|m| -m)).collect();
    let bounds: Vec<f64> = pts.iter().map(|p| 0.55 - (p[0] * p[0] + p[1] * p[1]).sqrt()).collect();
    let vertex_err = (lp - oracles::lp_by_vertices(&pts, &masses, &bounds)).abs();
    let xs_sigma = [-0.4, 0.05, 0.3];
    let mut line: Vec<(f64, f64)> = Vec::new();
    for i in 0..3 {
        line.push((xs_sigma[i], [0.7, 1.3, 0.4][i]));
        line.push((xs_sigma[i] + 0.0173, -[0.9, 1.0, 0.6][i]));
    }
    line.sort_by(|a, b| a.0.total_cmp(&b.0));
    let xs: Vec<f64> = line.iter().map(|p| p.0).collect();
    let lm: Vec<f64> = line.iter().map(|p| p.1).collect();
    let lb: Vec<f64> = xs.iter().map(|x| 0.6 - x.abs()).collect();
    let grid_oracle = oracles::lp_on_a_line(&xs, &lm, &lb, 1e-4);
    let s_pts: Vec<[f64; 2]> = xs_sigma.iter().map(|&x| [x, 0.0]).collect();
    let n_pts: Vec<[f64; 2]> = xs_sigma.iter().map(|&x| [x + 0.0173, 0.0]).collect();
    let on_line = flat_norm_distance(&atoms(&s_pts, &[0.7, 1.3, 0.4]), &atoms(&n_pts, &[0.9, 1.0, 0.6]), &[0.0, 0.0], 0.6).unwrap();
    let grid_err = (on_line - grid_oracle).abs();
    out.push(check(
        "5.lp",
        two_err <= LP_EXACT_TOLERANCE && grid_err <= LP_GRID_TOLERANCE && vertex_err <= LP_GRID_TOLERANCE,
        format!("dist_B: two atoms {two_err:.1e} off a·|p−q|; grid search {grid_err:.1e}; vertex enumeration {vertex_err:.1e}"),
    ));

    let cfg = AlphaConfig::default();
    let audit = |m: &DiscreteMeasure, interior: bool| {
        let idx = m.build_index();
        let lat = build_lattice(m, if interior { 10 } else { 5 }, None).unwrap();
        let root = if interior { interior_cube(&lat, m, 5).unwrap() } else { lat.root().id };
        parallel::alpha_packing_audit(m, &idx, &lat, root, 5, &cfg).unwrap()
    };
    let s = audit(&segment(4097), true);
    out.push(check(
        "5.packing.segment",
        s.ratio() <= SEGMENT_PACKING_MAX,
        format!("segment packing ratio {:.4} (depth 5 below an interior generation-5 cube)", s.ratio()),
    ));
    let g = audit(&graph(8193), true);
    let d = &g.ratio_by_depth;
    let growth = d[5] / d[4];
    out.push(check(
        "5.packing.graph",
        growth <= GRAPH_PACKING_GROWTH_MAX,
        format!("graph packing ratio depth 4 {:.4}, depth 5 {:.4}, growth {growth:.3}", d[4], d[5]),
    ));
    let c = audit(&cantor(8), false);
    let increasing = c.ratio_by_depth.windows(2).all(|w| w[1] > w[0]);
    let by_depth: Vec<String> = c.ratio_by_depth.iter().map(|v| format!("{v:.4}")).collect();
    out.push(check(
        "5.packing.cantor",
        increasing && c.slope() >= CANTOR_PACKING_SLOPE_MIN,
        format!("Cantor K=8 packing by depth [{}], slope {:.4} per generation", by_depth.join(", "), c.slope()),
    ));
    out
}

fn wcd_uniformity() -> Vec<Check> {
    let seg = segment(10_001);
    let idx = seg.build_index();
    let w = wcd_defect(&seg, &idx, &[0.5, 0.0], 0.2, &WcdConfig::default()).unwrap();
    let can = cantor(8);
    let cw = wcd_defect(&can, &can.build_index(), can.point(0), 1.0, &WcdConfig::default()).unwrap();
    let centers: Vec<usize> = (0..32).map(|i| 1000 + i * 250).collect();
    let scales = ratio_grid(5.0 * seg.resolution(), 0.02, 2.0);
    let mut uni = Vec::new();
    let mut uni_ok = true;
    for spec in [KernelSpec::gaussian(1, 1).unwrap(), KernelSpec::inverse_power(2.0, 1).unwrap()] {
        let rep = uniformity_identity_check(&seg, &idx, &spec, &centers, &scales).unwrap();
        uni_ok &= rep.variation <= UNIFORMITY_MAX;
        uni.push(format!("{} variation {:.2e} (c = {:.5}, {} cells, {} skipped)", spec.family(), rep.variation, rep.c, rep.values.len(), rep.skipped));
    }
    vec![
        check(
            "6.segment",
            w.defect <= SEGMENT_WCD_MAX && (SEGMENT_C1.0..=SEGMENT_C1.1).contains(&w.c1),
            format!("segment wcd defect {:.4}, c1 {:.4}", w.defect, w.c1),
        ),
        check("6.cantor", cw.defect >= CANTOR_WCD_MIN, format!("Cantor K=8 wcd defect {:.4} at best c1 {:.4}", cw.defect, cw.c1)),
        check("6.uniformity", uni_ok, format!("segment identity: {}", uni.join("; "))),
    ]
}

fn wavelets() -> Vec<Check> {
    let f = cascade_tables(3, 12).unwrap();
    let mut out = Vec::new();
    for n in [1usize, 2] {
        let cubes = zero_cubes(n, 600);
        let max = cubes.iter().map(|c| h_coefficient(&f, c).unwrap().value.abs()).fold(0.0, f64::max);
        out.push(check(
            &format!("7.zero.n{n}"),
            cubes.len() == 600 && max <= ZERO_TOLERANCE,
            format!("n = {n}: {} cubes with 5I off the spheres, max |a_I| = {max:.2e}", cubes.len()),
        ));
        let large = -(1.0 + n as f64 / 2.0);
        let (fit, _) = parallel::decay_regression(&f, n, &LARGE_LEVELS, large).unwrap();
        let (tail, _) = parallel::decay_regression(&f, n, &LARGE_LEVELS[1..], large).unwrap();
        out.push(check(
            &format!("7.large.n{n}"),
            (fit.slope - large).abs() <= SLOPE_TOLERANCE,
            format!(
                "n = {n}: large-cube slope {:.3} over ℓ = 2^1..2^6 (expected {large} ± {SLOPE_TOLERANCE}); over 2^2..2^6 {:.3}",
                fit.slope, tail.slope
            ),
        ));
        let small = n as f64 / 2.0;
        let (fit, _) = parallel::decay_regression(&f, n, &SMALL_LEVELS, small).unwrap();
        out.push(check(
            &format!("7.small.n{n}"),
            (fit.slope - small).abs() <= SLOPE_TOLERANCE,
            format!("n = {n}: small-cube slope {:.3} (expected {small} ± {SLOPE_TOLERANCE})", fit.slope),
        ));
        let rep = reconstruction_check(&f, -4, 10, &reconstruction_samples(n)).unwrap();
        out.push(check(
            &format!("7.reconstruction.n{n}"),
            rep.max_error <= RECONSTRUCTION_TOLERANCE,
            format!("n = {n}: reconstruction error {:.4} at {} points", rep.max_error, rep.samples.len()),
        ));
    }
    out
}

fn run_pipeline(dir: &Path, threads: &str) -> Result<(), String> {
    let steps: &[&[&str]] = &[
        &["generate", "--kind", "graph", "--points", "2049", "--seed", "11", "--out", "g.csv"],
        &["generate", "--kind", "cantor", "--generation", "5", "--out", "c.csv"],
        &["generate", "--kind", "perturbed-plane", "--points", "1500", "--seed", "11", "--out", "p.csv"],
        &["analyze", "--input", "g.csv", "--functional", "delta-smooth-k", "--k", "2", "--centers", "500", "--seed", "1", "--out", "f.csv"],
        &["analyze", "--input", "p.csv", "--functional", "beta2", "--centers", "200", "--seed", "2", "--out", "b.csv"],
        &["carleson", "--input", "c.csv", "--centers", "600", "--seed", "3", "--ball-center", "0", "--out", "k.json", "--field-out", "kf.csv"],
        &["alpha-audit", "--input", "g.csv", "--depth", "1", "--root-generation", "4", "--out", "l.json"],
        &["wcd", "--input", "c.csv", "--center", "0,100", "--radius", "0.5", "--samples", "24", "--seed", "4", "--out", "w.json"],
        &["uniformity", "--input", "g.csv", "--kernel", "gauss:N=2", "--centers", "12", "--seed", "5", "--t-max", "0.05", "--out", "u.json"],
        &["wavelet-check", "--n", "2", "--zero-cubes", "100", "--no-reconstruction", "--out", "wv.json", "--coeffs", "a.csv"],
        &["report", "--inputs", "f.json", "b.json", "k.json", "l.json", "w.json", "u.json", "wv.json", "--out", "r.md", "--csv", "r.csv"],
    ];
    for args in steps {
        let out = Command::new(env!("CARGO_BIN_EXE_rectiscan"))
            .current_dir(dir)
            .args(*args)
            .env("RECTISCAN_THREADS", threads)
            .output()
            .map_err(|e| e.to_string())?;
        if !out.status.success() {
            return Err(format!("{}: {}", args[0], String::from_utf8_lossy(&out.stderr)));
        }
    }
    Ok(())
}

fn determinism() -> Vec<Check> {
    let dirs: Vec<tempfile::TempDir> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (dir, threads) in dirs.iter().zip(["1", "1", "4"]) {
        if let Err(e) = run_pipeline(dir.path(), threads) {
            return vec![check("8.determinism", false, format!("pipeline failed: {e}"))];
        }
    }
    let listing = |d: &Path| {
        let mut v: Vec<String> = fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        v.sort();
        v
    };
    let names = listing(dirs[0].path());
    let mut differing = Vec::new();
    for other in &dirs[1..] {
        if listing(other.path()) != names {
            differing.push("file list".to_string());
        }
        for name in &names {
            if fs::read(dirs[0].path().join(name)).ok() != fs::read(other.path().join(name)).ok() {
                differing.push(name.clone());
            }
        }
    }
    vec![check(
        "8.determinism",
        differing.is_empty(),
        format!(
            "{} files from all eight subcommands, rerun with 1 and 4 threads: {}",
            names.len(),
            if differing.is_empty() { "byte-identical".to_string() } else { format!("differ in {}", differing.join(", ")) }
        ),
    )]
}

fn main() {
    let criteria: [(u32, &str, fn() -> Vec<Check>); 8] = [
        (1, "plane annihilation", plane_annihilation),
        (2, "Carleson dichotomy", carleson_dichotomy),
        (3, "smooth/non-smooth domination", domination),
        (4, "kernel identities", kernel_identities),
        (5, "alpha/beta machinery", alpha_beta),
        (6, "WCD and uniformity", wcd_uniformity),
        (7, "wavelet module", wavelets),
        (8, "determinism", determinism),
    ];
    let mut unexpected = Vec::new();
    for (id, name, run) in criteria {
        let start = Instant::now();
        let checks = run();
        let passed = checks.iter().all(|c| c.passed);
        println!(
            "criterion {id} ({name}): {} [{:.1} s]",
            if passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        for c in &checks {
            let known = KNOWN_FAILURES.contains(&c.id.as_str());
            let tag = match (c.passed, known) {
                (true, false) => "ok",
                (true, true) => "ok (listed as a known failure)",
                (false, true) => "FAIL (known)",
                (false, false) => "FAIL",
            };
            println!("    {} {tag}: {}", c.id, c.detail);
            if !c.passed && !known {
                unexpected.push(c.id.clone());
            }
        }
    }
    if !unexpected.is_empty() {
        println!("unexpected failures: {}", unexpected.join(", "));
        std::process::exit(1);
    }
}
