//! Constant-density defects and the identity ∫f(|x−y|²/t²)dμ(y) = c·t^n.

use alloc::string::String;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use core::f64::consts::SQRT_2;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Error, Result};
use crate::kernels::KernelSpec;
use crate::measure::{check_scale, ratio_grid, DiscreteMeasure};
use crate::spatial::SpatialIndex;
use crate::square::{kernel_sum, EdgeModel};

#[derive(Debug, Clone, PartialEq)]
pub struct WcdConfig {
    /// number of centers y drawn from B(x0, r) ∩ supp μ (all if fewer)
    pub samples: usize,
    pub seed: u64,
    pub golden_iterations: usize,
}

impl Default for WcdConfig {
    fn default() -> Self {
        WcdConfig { samples: 64, seed: 0, golden_iterations: 80 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WcdDefect {
    pub center: Vec<f64>,
    pub radius: f64,
    pub c1: f64,
    /// max over the sample of |μ(B(y,t)) − c1·t^n| / r^n
    pub defect: f64,
    pub centers: Vec<usize>,
    pub scales: Vec<f64>,
}

/// Minimizes sup |μ(B(y,t)) − c1 t^n| / r^n over c1 ∈ [0, 2·max μ(B(y,t))/t^n]
/// by golden-section search, with y sampled from B(x0, r) and t on a √2 grid
/// from the resolution to r.
pub fn wcd_defect(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    x0: &[f64],
    r: f64,
    cfg: &WcdConfig,
) -> Result<WcdDefect> {
    let res = measure.resolution();
    if !(r >= 10.0 * res * (1.0 - 1e-12)) {
        return Err(Error::Range { scale: r, min: 10.0 * res, max: f64::INFINITY });
    }
    let inside = index.indices_in_ball(x0, r);
    if inside.len() < 2 {
        return Err(invalid("too few support points in the ball"));
    }
    let centers = if inside.len() <= cfg.samples {
        inside
    } else {
        let mut pool = inside;
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for i in 0..cfg.samples {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(cfg.samples);
        pool.sort_unstable();
        pool
    };
    let scales = ratio_grid(res, r, SQRT_2);
    let n = measure.target_dim() as i32;
    let rn = r.powi(n);
    let mut cells: Vec<(f64, f64)> = Vec::with_capacity(centers.len() * scales.len());
    let mut max_ratio: f64 = 0.0;
    for &y in &centers {
        for &t in &scales {
            let m = index.ball_mass(measure.point(y), t);
            let tn = t.powi(n);
            max_ratio = max_ratio.max(m / tn);
            cells.push((m, tn));
        }
    }
    let defect_at = |c: f64| cells.iter().map(|(m, tn)| (m - c * tn).abs()).fold(0.0, f64::max) / rn;
    let (mut a, mut b) = (0.0, 2.0 * max_ratio);
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (defect_at(x1), defect_at(x2));
    for _ in 0..cfg.golden_iterations {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = defect_at(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = defect_at(x2);
        }
    }
    let (c1, defect) = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    Ok(WcdDefect { center: x0.to_vec(), radius: r, c1, defect, centers, scales })
}

#[derive(Debug, Clone, PartialEq)]
pub struct IdentityReport {
    /// (center index, t, t^{-n}∫f(|x−y|²/t²)dμ(y))
    pub values: Vec<(usize, f64, f64)>,
    /// median of the values
    pub c: f64,
    /// max |value / c − 1|
    pub variation: f64,
    /// (center, t) cells skipped because the kernel tail beyond the data
    /// edge would exceed `EDGE_TAIL` of its mass (and always within 2t)
    pub skipped: usize,
    pub warnings: Vec<String>,
}

/// Largest share of the kernel mass allowed past the data edge.
pub const EDGE_TAIL: f64 = 1e-3;

/// Checks how far t^{-n}∫f(|x−y|²/t²)dμ(y) is from a constant over centers
/// and scales, where f is the profile of `spec`.
pub fn uniformity_identity_check(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    spec: &KernelSpec,
    centers: &[usize],
    scales: &[f64],
) -> Result<IdentityReport> {
    if !spec.is_smooth() {
        return Err(Error::UnsupportedKernel("the identity check needs a smooth profile".into()));
    }
    if centers.is_empty() || scales.is_empty() {
        return Err(invalid("empty center set or scale grid"));
    }
    let lo = 5.0 * measure.resolution();
    let hi = measure.diameter() / 4.0;
    for &t in scales {
        check_scale(t, lo, hi)?;
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= measure.len()) {
        return Err(invalid(alloc::format!("center index {c} out of range")));
    }
    let edges = EdgeModel::new(measure);
    let margin = spec.tail_radius(EDGE_TAIL).max(2.0);
    let mut values = Vec::new();
    let mut skipped = 0;
    let mut warnings = Vec::new();
    for &c in centers {
        let x = measure.point(c);
        let edge = edges.distance(x);
        for &t in scales {
            if edge < margin * t {
                skipped += 1;
                continue;
            }
            let radius = spec.truncation_factor() * t;
            if radius > edge {
                warnings.push(alloc::format!("truncation radius {radius} at t = {t} reaches past the data edge"));
            }
            let v = kernel_sum(measure, index, x, radius, |d2| spec.phi_t_r2(d2, t));
            values.push((c, t, v));
        }
    }
    if values.is_empty() {
        return Err(invalid("every (center, t) cell is too close to the data edge"));
    }
    warnings.sort();
    warnings.dedup();
    let mut sorted: Vec<f64> = values.iter().map(|v| v.2).collect();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len();
    let c = if m % 2 == 1 { sorted[m / 2] } else { 0.5 * (sorted[m / 2 - 1] + sorted[m / 2]) };
    let variation = values.iter().map(|v| (v.2 / c - 1.0).abs()).fold(0.0, f64::max);
    Ok(IdentityReport { values, c, variation, skipped, warnings })
}
