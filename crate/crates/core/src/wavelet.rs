//! Daubechies wavelets with three vanishing moments and the expansion of
//! h̃ = χ_{B_n(0,1)} − 2^{-n}χ_{B_n(0,2)} for n = 1, 2.
//!
//! Both φ and ψ live on [0, 5]. For a dyadic interval I = [kℓ, (k+1)ℓ] the
//! wavelet ψ_I(x) = ℓ^{-1/2} ψ((x − kℓ)/ℓ + 2) is supported on 5I; this is a
//! relabelling of the usual orthonormal basis.

use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::quadrature::GaussLegendre;
use crate::square::linear_fit;

/// Low-pass filter of the 6-tap Daubechies wavelet (Σ h_k = √2).
pub const DB3_FILTER: [f64; 6] = [
    0.332_670_552_950_082_6,
    0.806_891_509_311_092_6,
    0.459_877_502_118_491_6,
    -0.135_011_020_010_254_6,
    -0.085_441_273_882_026_66,
    0.035_226_291_885_709_54,
];

pub const SUPPORT: f64 = 5.0;
pub const DEFAULT_DEPTH: u32 = 12;
/// finest and coarsest admissible levels: ℓ(I) = 2^{-level}
pub const MIN_LEVEL: i32 = -6;
pub const MAX_LEVEL: i32 = 12;

/// φ and ψ sampled at the dyadic points m·2^{-J} of [0, 5], with exact
/// antiderivatives of their piecewise-linear interpolants.
#[derive(Debug, Clone)]
pub struct WaveletFamily {
    depth: u32,
    step: f64,
    phi: Vec<f64>,
    psi: Vec<f64>,
    phi_int: Vec<f64>,
    psi_int: Vec<f64>,
}

/// Tables for the Daubechies wavelet with `vanishing_moments` vanishing
/// moments (only 3 is available) by the cascade algorithm at depth `depth`.
pub fn cascade_tables(vanishing_moments: usize, depth: u32) -> Result<WaveletFamily> {
    if vanishing_moments != 3 {
        return Err(invalid("only the wavelet with 3 vanishing moments is available"));
    }
    if depth > 16 {
        return Err(invalid("cascade depth is limited to 16"));
    }
    let h = DB3_FILTER;
    let scale = 1usize << depth;
    let len = 5 * scale + 1;
    let mut phi = alloc::vec![0.0; len];

    // φ(1..4) is the eigenvector of φ(i) = √2 Σ h_k φ(2i − k) with Σ φ(i) = 1
    let mut a = [[0.0f64; 5]; 4];
    for i in 0..4 {
        for j in 0..4 {
            let k = 2 * (i as i64 + 1) - (j as i64 + 1);
            let v = if (0..6).contains(&k) { SQRT_2 * h[k as usize] } else { 0.0 };
            a[i][j] = v - if i == j { 1.0 } else { 0.0 };
        }
    }
    a[3] = [1.0, 1.0, 1.0, 1.0, 1.0];
    let ints = solve4(a);
    for i in 0..4 {
        phi[(i + 1) * scale] = ints[i];
    }
    for level in 1..=depth {
        let stride = scale >> level;
        let coarse = 2 * stride;
        let mut m = stride;
        while m < len {
            // φ(x) = √2 Σ h_k φ(2x − k)
            let mut v = 0.0;
            for (k, hk) in h.iter().enumerate() {
                let idx = 2 * m as i64 - (k * scale) as i64;
                if idx >= 0 && (idx as usize) < len {
                    debug_assert_eq!(idx as usize % coarse, 0);
                    v += hk * phi[idx as usize];
                }
            }
            phi[m] = SQRT_2 * v;
            m += coarse;
        }
    }
    let mut psi = alloc::vec![0.0; len];
    for (m, out) in psi.iter_mut().enumerate() {
        let mut v = 0.0;
        for k in 0..6 {
            let g = if k % 2 == 0 { h[5 - k] } else { -h[5 - k] };
            let idx = 2 * m as i64 - (k * scale) as i64;
            if idx >= 0 && (idx as usize) < len {
                v += g * phi[idx as usize];
            }
        }
        *out = SQRT_2 * v;
    }
    let step = 1.0 / scale as f64;
    let phi_int = cumulative(&phi, step);
    let psi_int = cumulative(&psi, step);
    Ok(WaveletFamily { depth, step, phi, psi, phi_int, psi_int })
}

fn solve4(mut a: [[f64; 5]; 4]) -> [f64; 4] {
    for col in 0..4 {
        let piv = (col..4).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs())).unwrap();
        a.swap(col, piv);
        for row in 0..4 {
            if row != col {
                let f = a[row][col] / a[col][col];
                for k in col..5 {
                    a[row][k] -= f * a[col][k];
                }
            }
        }
    }
    [a[0][4] / a[0][0], a[1][4] / a[1][1], a[2][4] / a[2][2], a[3][4] / a[3][3]]
}

fn cumulative(f: &[f64], step: f64) -> Vec<f64> {
    let mut out = alloc::vec![0.0; f.len()];
    for i in 1..f.len() {
        out[i] = out[i - 1] + 0.5 * step * (f[i - 1] + f[i]);
    }
    out
}

impl WaveletFamily {
    pub fn depth(&self) -> u32 {
        self.depth
    }

    fn interp(&self, table: &[f64], u: f64) -> f64 {
        if !(u > 0.0 && u < SUPPORT) {
            return 0.0;
        }
        let x = u / self.step;
        let i = (x.floor() as usize).min(table.len() - 2);
        let t = x - i as f64;
        table[i] + t * (table[i + 1] - table[i])
    }

    fn antiderivative(&self, table: &[f64], integral: &[f64], u: f64) -> f64 {
        if !(u > 0.0) {
            return 0.0;
        }
        if u >= SUPPORT {
            return integral[integral.len() - 1];
        }
        let x = u / self.step;
        let i = (x.floor() as usize).min(table.len() - 2);
        let d = (x - i as f64) * self.step;
        let slope = (table[i + 1] - table[i]) / self.step;
        integral[i] + table[i] * d + 0.5 * slope * d * d
    }

    pub fn phi(&self, u: f64) -> f64 {
        self.interp(&self.phi, u)
    }

    pub fn psi(&self, u: f64) -> f64 {
        self.interp(&self.psi, u)
    }

    /// ∫_0^u φ
    pub fn phi_integral(&self, u: f64) -> f64 {
        self.antiderivative(&self.phi, &self.phi_int, u)
    }

    /// ∫_0^u ψ
    pub fn psi_integral(&self, u: f64) -> f64 {
        self.antiderivative(&self.psi, &self.psi_int, u)
    }

    /// ∫ x^m ψ(x) dx by the trapezoid rule on the table.
    pub fn psi_moment(&self, m: u32) -> f64 {
        let n = self.psi.len();
        (0..n)
            .map(|i| {
                let w = if i == 0 || i == n - 1 { 0.5 } else { 1.0 };
                w * self.psi[i] * (i as f64 * self.step).powi(m as i32)
            })
            .sum::<f64>()
            * self.step
    }

    /// ‖ψ‖₂ by the trapezoid rule on the table.
    pub fn psi_norm(&self) -> f64 {
        (self.psi.iter().map(|v| v * v).sum::<f64>() * self.step).sqrt()
    }

    fn factor(&self, wavelet: bool, u: f64) -> f64 {
        if wavelet {
            self.psi(u)
        } else {
            self.phi(u)
        }
    }

    fn factor_integral(&self, wavelet: bool, u: f64) -> f64 {
        if wavelet {
            self.psi_integral(u)
        } else {
            self.phi_integral(u)
        }
    }
}

/// A dyadic cube of side 2^{-level} with integer offsets, and an
/// orientation: 1 for n = 1; for n = 2, 1 = ψ⊗φ, 2 = φ⊗ψ, 3 = ψ⊗ψ.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DyadicCube {
    pub level: i32,
    pub offset: Vec<i64>,
    pub orientation: u8,
}

impl DyadicCube {
    pub fn new(level: i32, offset: Vec<i64>, orientation: u8) -> Self {
        DyadicCube { level, offset, orientation }
    }

    pub fn side(&self) -> f64 {
        2f64.powi(-self.level)
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    /// 5I along axis `k` as [lo, hi].
    pub fn five_fold(&self, k: usize) -> (f64, f64) {
        let l = self.side();
        let a = self.offset[k] as f64 * l;
        (a - 2.0 * l, a + 3.0 * l)
    }

    fn factors(&self) -> Vec<bool> {
        match (self.dim(), self.orientation) {
            (1, _) => alloc::vec![true],
            (_, 1) => alloc::vec![true, false],
            (_, 2) => alloc::vec![false, true],
            _ => alloc::vec![true, true],
        }
    }

    /// Whether 5I stays clear of the spheres |x| = 1 and |x| = 2.
    pub fn five_fold_misses_spheres(&self) -> bool {
        let (mut near2, mut far2) = (0.0, 0.0);
        for k in 0..self.dim() {
            let (lo, hi) = self.five_fold(k);
            let near = if lo > 0.0 { lo } else if hi < 0.0 { -hi } else { 0.0 };
            let far = lo.abs().max(hi.abs());
            near2 += near * near;
            far2 += far * far;
        }
        // the closed cube meets the sphere of radius R iff near ≤ R ≤ far
        [1.0f64, 2.0].iter().all(|&r| !(near2 <= r * r && r * r <= far2))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveletCoeff {
    pub cube: DyadicCube,
    pub value: f64,
}

fn check_cube(cube: &DyadicCube) -> Result<()> {
    if !(1..=2).contains(&cube.dim()) {
        return Err(invalid("wavelet coefficients are available for n = 1 and n = 2"));
    }
    if cube.orientation == 0 || (cube.dim() == 1 && cube.orientation != 1) || cube.orientation > 3 {
        return Err(invalid("orientation must be 1 for n = 1 and 1..=3 for n = 2"));
    }
    if !(MIN_LEVEL..=MAX_LEVEL).contains(&cube.level) {
        return Err(Error::Range { scale: cube.side(), min: 2f64.powi(-MAX_LEVEL), max: 2f64.powi(-MIN_LEVEL) });
    }
    Ok(())
}

/// ψ_I at x.
pub fn wavelet_value(family: &WaveletFamily, cube: &DyadicCube, x: &[f64]) -> f64 {
    let l = cube.side();
    let norm = l.powf(-0.5 * cube.dim() as f64);
    cube.factors()
        .iter()
        .enumerate()
        .map(|(k, &w)| family.factor(w, (x[k] - cube.offset[k] as f64 * l) / l + 2.0))
        .product::<f64>()
        * norm
}

/// a_I = ⟨h̃, ψ_I⟩.
pub fn h_coefficient(family: &WaveletFamily, cube: &DyadicCube) -> Result<WaveletCoeff> {
    check_cube(cube)?;
    let n = cube.dim();
    let balls = [(1.0, 1.0), (2.0, -(0.5f64.powi(n as i32)))];
    let value = match n {
        1 => balls.iter().map(|&(r, c)| c * interval_integral(family, cube, true, 0, -r, r)).sum(),
        _ => {
            let f = cube.factors();
            balls.iter().map(|&(r, c)| c * disc_integral(family, cube, f[0], f[1], r)).sum()
        }
    };
    Ok(WaveletCoeff { cube: cube.clone(), value })
}

/// ∫_a^b of the (unnormalized-by-other-axes) factor along axis k:
/// ℓ^{-1/2} ∫_a^b f((x − kℓ)/ℓ + 2) dx.
fn interval_integral(family: &WaveletFamily, cube: &DyadicCube, wavelet: bool, axis: usize, a: f64, b: f64) -> f64 {
    let l = cube.side();
    let shift = cube.offset[axis] as f64;
    let u = |x: f64| x / l - shift + 2.0;
    l.sqrt() * (family.factor_integral(wavelet, u(b)) - family.factor_integral(wavelet, u(a)))
}

/// ∫∫_{|x| ≤ R} f1 ⊗ f2 as ∫ f1(x) G(x) dx with G the exact chord integral
/// of f2. Where the chord covers the support of f2, G is constant and the
/// x-integral uses the antiderivative of f1; elsewhere Gauss–Legendre
/// panels graded toward x = ±R.
fn disc_integral(family: &WaveletFamily, cube: &DyadicCube, f1: bool, f2: bool, r: f64) -> f64 {
    let l = cube.side();
    let (xlo, xhi) = cube.five_fold(0);
    let (ylo, yhi) = cube.five_fold(1);
    let (a, b) = (xlo.max(-r), xhi.min(r));
    if !(a < b) {
        return 0.0;
    }
    let mut breaks = alloc::vec![a, b];
    for y in [ylo, yhi] {
        if y.abs() < r {
            let x = (r * r - y * y).sqrt();
            breaks.extend([-x, x]);
        }
    }
    breaks.retain(|x| *x >= a && *x <= b);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let full_chord = l.sqrt() * (family.factor_integral(f2, SUPPORT) - family.factor_integral(f2, 0.0));
    let chord = |x: f64| {
        let h = (r * r - x * x).max(0.0).sqrt();
        interval_integral(family, cube, f2, 1, -h, h)
    };
    let f1x = |x: f64| l.powf(-0.5) * family.factor(f1, x / l - cube.offset[0] as f64 + 2.0);
    let rule = GaussLegendre::new(20);
    let mut total = 0.0;
    for w in breaks.windows(2) {
        let (p, q) = (w[0], w[1]);
        if q <= p {
            continue;
        }
        let mid = 0.5 * (p + q);
        let h = (r * r - mid * mid).max(0.0).sqrt();
        if -h <= ylo && h >= yhi {
            total += full_chord * interval_integral(family, cube, f1, 0, p, q);
            continue;
        }
        let panels = ((q - p) / (l / 16.0)).ceil().max(1.0) as usize;
        let width = (q - p) / panels as f64;
        for i in 0..panels {
            let (s, t) = (p + i as f64 * width, p + (i + 1) as f64 * width);
            let g = |x: f64| f1x(x) * chord(x);
            // the chord has a square-root singularity at x = ±R
            if (t - r).abs() < 1e-15 * r || (s + r).abs() < 1e-15 * r {
                total += graded(&rule, s, t, s + r < 1e-15 * r, g);
            } else {
                total += rule.integrate(s, t, g);
            }
        }
    }
    total
}

/// ∫_s^t g with panels shrinking geometrically toward the singular end.
fn graded<F: Fn(f64) -> f64>(rule: &GaussLegendre, s: f64, t: f64, at_start: bool, g: F) -> f64 {
    let len = t - s;
    let mut total = 0.0;
    let mut w = len;
    for _ in 0..40 {
        let (lo, hi) = (0.5 * w, w);
        total += if at_start { rule.integrate(s + lo, s + hi, &g) } else { rule.integrate(t - hi, t - lo, &g) };
        w *= 0.5;
    }
    total + if at_start { rule.integrate(s, s + w, &g) } else { rule.integrate(t - w, t, &g) }
}

/// Cubes at `level` whose 5I meets the closed ball B(0, 2): all of them for
/// n = 1, and for n = 2 either all of them (when there are at most
/// `cap` offsets) or those whose 5I contains one of `probes` points spread
/// over the two circles.
pub fn candidate_cubes(n: usize, level: i32, cap: usize, probes: usize) -> Vec<DyadicCube> {
    let l = 2f64.powi(-level);
    let lo = (-2.0 / l).floor() as i64 - 3;
    let hi = (2.0 / l).ceil() as i64 + 2;
    let orientations: &[u8] = if n == 1 { &[1] } else { &[1, 2, 3] };
    let mut out = Vec::new();
    if n == 1 {
        for k in lo..=hi {
            out.push(DyadicCube::new(level, alloc::vec![k], 1));
        }
        return out;
    }
    let span = (hi - lo + 1) as usize;
    if span * span <= cap {
        for k0 in lo..=hi {
            for k1 in lo..=hi {
                for &o in orientations {
                    out.push(DyadicCube::new(level, alloc::vec![k0, k1], o));
                }
            }
        }
        return out;
    }
    let mut offsets: Vec<(i64, i64)> = Vec::new();
    for radius in [1.0, 2.0] {
        for p in 0..probes {
            // angles strictly inside the first octant's quarter, off the axes
            let theta = (p as f64 + 0.5) * core::f64::consts::FRAC_PI_2 / probes as f64;
            let (px, py) = (radius * theta.cos(), radius * theta.sin());
            let (cx, cy) = ((px / l).floor() as i64, (py / l).floor() as i64);
            for dx in -2..=2 {
                for dy in -2..=2 {
                    offsets.push((cx + dx, cy + dy));
                }
            }
        }
    }
    offsets.sort_unstable();
    offsets.dedup();
    for (k0, k1) in offsets {
        for &o in orientations {
            out.push(DyadicCube::new(level, alloc::vec![k0, k1], o));
        }
    }
    out
}

/// `count` cubes whose 5I misses both spheres, so that a_I = 0: an evenly
/// spaced selection from each level (-1..=7 for n = 1, -1..=4 for n = 2)
/// of the cubes with 5I inside [-6, 6]^n.
pub fn zero_cubes(n: usize, count: usize) -> Vec<DyadicCube> {
    let orientations: &[u8] = if n == 1 { &[1] } else { &[1, 2, 3] };
    let levels: Vec<i32> = if n == 1 { (-1..=7).collect() } else { (-1..=4).collect() };
    let mut found_by_level = Vec::new();
    for &level in &levels {
        let l = 2f64.powi(-level);
        let lo = (-6.0 / l).ceil() as i64 + 2;
        let hi = (6.0 / l).floor() as i64 - 3;
        let mut found = Vec::new();
        let mut offset = alloc::vec![lo; n];
        'outer: loop {
            for &o in orientations {
                let cube = DyadicCube::new(level, offset.clone(), o);
                if cube.five_fold_misses_spheres() {
                    found.push(cube);
                }
            }
            for k in 0..n {
                offset[k] += 1;
                if offset[k] <= hi {
                    continue 'outer;
                }
                offset[k] = lo;
            }
            break;
        }
        found_by_level.push(found);
    }
    // levels with few cubes give their share to the others
    let mut order: Vec<usize> = (0..levels.len()).collect();
    order.sort_by_key(|&i| found_by_level[i].len());
    let mut quota = alloc::vec![0usize; levels.len()];
    let mut remaining = count;
    for (done, &i) in order.iter().enumerate() {
        let share = remaining.div_ceil(levels.len() - done);
        quota[i] = share.min(found_by_level[i].len());
        remaining -= quota[i];
    }
    let mut out = Vec::new();
    for (found, q) in found_by_level.into_iter().zip(quota) {
        if q > 0 {
            let stride = found.len() / q;
            out.extend(found.into_iter().step_by(stride).take(q));
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    /// ℓ(I) per level
    pub sides: Vec<f64>,
    /// max |a_I| per level
    pub maxima: Vec<f64>,
    /// slope of log2 max|a_I| against log2 ℓ(I)
    pub slope: f64,
    pub expected: f64,
}

/// Log–log regression of max_I |a_I| over the given levels.
pub fn decay_regression(family: &WaveletFamily, n: usize, levels: &[i32], expected: f64) -> Result<DecayFit> {
    let mut sides = Vec::new();
    let mut maxima = Vec::new();
    for &level in levels {
        let mut best: f64 = 0.0;
        for cube in candidate_cubes(n, level, 400, 16) {
            best = best.max(h_coefficient(family, &cube)?.value.abs());
        }
        sides.push(2f64.powi(-level));
        maxima.push(best);
    }
    let xs: Vec<f64> = sides.iter().map(|s| s.log2()).collect();
    let ys: Vec<f64> = maxima.iter().map(|m| m.max(f64::MIN_POSITIVE).log2()).collect();
    Ok(DecayFit { slope: linear_fit(&xs, &ys).slope, sides, maxima, expected })
}

/// h̃(x).
pub fn h_tilde(x: &[f64]) -> f64 {
    let r2: f64 = x.iter().map(|v| v * v).sum();
    let n = x.len() as i32;
    let mut v = 0.0;
    if r2 <= 1.0 {
        v += 1.0;
    }
    if r2 <= 4.0 {
        v -= 0.5f64.powi(n);
    }
    v
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconstructionReport {
    /// (sample, partial sum, h̃(sample))
    pub samples: Vec<(Vec<f64>, f64, f64)>,
    pub max_error: f64,
    pub coefficients: usize,
}

/// Partial sums Σ a_I ψ_I over levels `lo..=hi` (ℓ from 2^{-hi} to 2^{-lo})
/// compared with h̃ at the sample points.
pub fn reconstruction_check(family: &WaveletFamily, lo: i32, hi: i32, samples: &[Vec<f64>]) -> Result<ReconstructionReport> {
    let mut out = Vec::new();
    let mut max_error: f64 = 0.0;
    let mut count = 0;
    for x in samples {
        let n = x.len();
        let orientations: &[u8] = if n == 1 { &[1] } else { &[1, 2, 3] };
        let mut sum = 0.0;
        for level in lo..=hi {
            let l = 2f64.powi(-level);
            // cubes whose 5I contains x
            let base: Vec<i64> = x.iter().map(|v| (v / l).floor() as i64).collect();
            let mut offs = alloc::vec![-2i64; n];
            loop {
                let offset: Vec<i64> = base.iter().zip(&offs).map(|(b, o)| b + o).collect();
                for &o in orientations {
                    let cube = DyadicCube::new(level, offset.clone(), o);
                    let psi = wavelet_value(family, &cube, x);
                    if psi != 0.0 {
                        sum += h_coefficient(family, &cube)?.value * psi;
                        count += 1;
                    }
                }
                let mut k = 0;
                loop {
                    if k == n {
                        break;
                    }
                    offs[k] += 1;
                    if offs[k] <= 2 {
                        break;
                    }
                    offs[k] = -2;
                    k += 1;
                }
                if k == n {
                    break;
                }
            }
        }
        let target = h_tilde(x);
        max_error = max_error.max((sum - target).abs());
        out.push((x.clone(), sum, target));
    }
    Ok(ReconstructionReport { samples: out, max_error, coefficients: count })
}

/// ⟨ψ_I, ψ_J⟩ for n = 1 by the trapezoid rule on the finer cube's table grid.
pub fn inner_product_1d(family: &WaveletFamily, a: &DyadicCube, b: &DyadicCube) -> f64 {
    let (alo, ahi) = a.five_fold(0);
    let (blo, bhi) = b.five_fold(0);
    let (lo, hi) = (alo.max(blo), ahi.min(bhi));
    if !(lo < hi) {
        return 0.0;
    }
    let h = a.side().min(b.side()) * family.step;
    let steps = ((hi - lo) / h).round() as usize;
    (0..=steps)
        .map(|i| {
            let x = [lo + i as f64 * h];
            let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
            w * wavelet_value(family, a, &x) * wavelet_value(family, b, &x)
        })
        .sum::<f64>()
        * h
}
