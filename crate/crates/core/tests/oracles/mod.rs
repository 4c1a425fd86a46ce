//! Independent reference computations used by the integration tests. None of
//! them call into the crate except to read kernel values.
#![allow(dead_code)]

/// t^k ∂_t^k f at t from centered differences with steps h and h/2 combined
/// by one Richardson step. The k = 3 stencil is the five-point one.
pub fn scaled_t_derivative(f: impl Fn(f64) -> f64, t: f64, k: usize) -> f64 {
    let stencil = |h: f64| match k {
        1 => (f(t + h) - f(t - h)) / (2.0 * h),
        2 => (f(t + h) - 2.0 * f(t) + f(t - h)) / (h * h),
        3 => (f(t + 2.0 * h) - 2.0 * f(t + h) + 2.0 * f(t - h) - f(t - 2.0 * h)) / (2.0 * h * h * h),
        _ => panic!("stencil for k = {k} not available"),
    };
    let h = t * if k == 1 { 1e-3 } else { 2e-3 };
    let (coarse, fine) = (stencil(h), stencil(h / 2.0));
    t.powi(k as i32) * (fine + (fine - coarse) / 3.0)
}

/// Composite Simpson rule with `panels` (even) subintervals.
pub fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, panels: usize) -> f64 {
    let h = (b - a) / panels as f64;
    let mut s = f(a) + f(b);
    for i in 1..panels {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// min over lines of Σ_{|y−x| ≤ r} w·dist(y, L) / r², searched over 721
/// directions in [0, π] and 201 offsets within r of x.
pub fn brute_beta1(points: &[[f64; 2]], weights: &[f64], x: [f64; 2], r: f64) -> f64 {
    let inside: Vec<([f64; 2], f64)> = points
        .iter()
        .zip(weights)
        .filter(|(p, _)| (p[0] - x[0]).powi(2) + (p[1] - x[1]).powi(2) <= r * r)
        .map(|(p, &w)| (*p, w))
        .collect();
    let mut best = f64::INFINITY;
    for i in 0..=720 {
        let theta = i as f64 * std::f64::consts::PI / 720.0;
        let nu = [theta.cos(), theta.sin()];
        let base = x[0] * nu[0] + x[1] * nu[1];
        for j in 0..=200 {
            let c = base + r * (j as f64 / 100.0 - 1.0);
            let total: f64 = inside.iter().map(|(p, w)| w * (p[0] * nu[0] + p[1] * nu[1] - c).abs()).sum();
            best = best.min(total);
        }
    }
    best / (r * r)
}

/// Exact optimum of max Σ f(p)·m(p) subject to |f(p) − f(q)| ≤ |p − q| and
/// |f(p)| ≤ bound(p), by enumerating every vertex of the feasible polytope.
pub fn lp_by_vertices(points: &[[f64; 2]], masses: &[f64], bounds: &[f64]) -> f64 {
    let m = points.len();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for p in 0..m {
        let mut a = vec![0.0; m];
        a[p] = 1.0;
        rows.push((a.clone(), bounds[p]));
        a[p] = -1.0;
        rows.push((a, bounds[p]));
        for q in 0..m {
            if q != p {
                let mut a = vec![0.0; m];
                a[p] = 1.0;
                a[q] = -1.0;
                let d = ((points[p][0] - points[q][0]).powi(2) + (points[p][1] - points[q][1]).powi(2)).sqrt();
                rows.push((a, d));
            }
        }
    }
    let mut best = f64::NEG_INFINITY;
    let mut pick: Vec<usize> = (0..m).collect();
    loop {
        if let Some(f) = solve_square(&pick.iter().map(|&i| rows[i].clone()).collect::<Vec<_>>()) {
            let feasible = rows.iter().all(|(a, b)| a.iter().zip(&f).map(|(x, y)| x * y).sum::<f64>() <= b + 1e-12);
            if feasible {
                best = best.max(f.iter().zip(masses).map(|(x, y)| x * y).sum());
            }
        }
        // next combination in lexicographic order
        let mut i = m;
        loop {
            if i == 0 {
                return best;
            }
            i -= 1;
            if pick[i] < rows.len() - m + i {
                break;
            }
        }
        pick[i] += 1;
        for j in i + 1..m {
            pick[j] = pick[j - 1] + 1;
        }
    }
}

fn solve_square(rows: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    let m = rows.len();
    let mut a: Vec<Vec<f64>> = rows.iter().map(|(r, b)| {
        let mut v = r.clone();
        v.push(*b);
        v
    }).collect();
    for c in 0..m {
        let p = (c..m).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs()))?;
        if a[p][c].abs() < 1e-12 {
            return None;
        }
        a.swap(c, p);
        for r in 0..m {
            if r != c {
                let f = a[r][c] / a[c][c];
                for k in c..=m {
                    a[r][k] -= f * a[c][k];
                }
            }
        }
    }
    Some((0..m).map(|i| a[i][m] / a[i][i]).collect())
}

/// Grid search over f ∈ η·Z at collinear atoms `xs` (sorted) with masses
/// `masses` and bounds |f| ≤ bound, |f_i − f_{i+1}| ≤ xs[i+1] − xs[i]. The
/// search is exact when every coordinate and bound is a multiple of η.
pub fn lp_on_a_line(xs: &[f64], masses: &[f64], bounds: &[f64], eta: f64) -> f64 {
    let levels = |b: f64| (b / eta).round() as i64;
    let top = bounds.iter().map(|&b| levels(b)).max().unwrap();
    let width = (2 * top + 1) as usize;
    let idx = |v: i64| (v + top) as usize;
    let mut best = vec![f64::NEG_INFINITY; width];
    for v in -levels(bounds[0])..=levels(bounds[0]) {
        best[idx(v)] = v as f64 * eta * masses[0];
    }
    for i in 1..xs.len() {
        let gap = levels(xs[i] - xs[i - 1]);
        // sliding-window maximum of `best` over [v − gap, v + gap]
        let mut window = vec![f64::NEG_INFINITY; width];
        let mut deque: std::collections::VecDeque<usize> = Default::default();
        let mut next = 0usize;
        for (out, slot) in window.iter_mut().enumerate() {
            let hi = (out as i64 + gap).min(width as i64 - 1) as usize;
            while next <= hi {
                while deque.back().map_or(false, |&j| best[j] <= best[next]) {
                    deque.pop_back();
                }
                deque.push_back(next);
                next += 1;
            }
            while deque.front().map_or(false, |&j| (j as i64) < out as i64 - gap) {
                deque.pop_front();
            }
            *slot = best[*deque.front().unwrap()];
        }
        let b = levels(bounds[i]);
        best = vec![f64::NEG_INFINITY; width];
        for v in -b..=b {
            best[idx(v)] = window[idx(v)] + v as f64 * eta * masses[i];
        }
    }
    best.into_iter().fold(f64::NEG_INFINITY, f64::max)
}
