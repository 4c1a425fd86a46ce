//! Density-difference square functions and their Carleson-box estimators.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::f64::consts::SQRT_2;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::geometry;
use crate::kernels::KernelSpec;
use crate::linalg::{dot, symmetric_eigen};
use crate::measure::{check_scale, DiscreteMeasure};
use crate::sampling::CenterSample;
use crate::spatial::SpatialIndex;
use crate::uniformity;

/// Default ratio of the dr/r grid used for Carleson sums.
pub const CARLESON_GRID_RATIO: f64 = SQRT_2;

/// Δ_μ(x,r) = μ(B(x,r))/r^n − μ(B(x,2r))/(2r)^n.
pub fn delta_density(measure: &DiscreteMeasure, index: &SpatialIndex, x: &[f64], r: f64) -> Result<f64> {
    check_scale(r, measure.resolution(), measure.diameter().max(measure.resolution()))?;
    Ok(delta_density_unchecked(measure, index, x, r))
}

fn delta_density_unchecked(measure: &DiscreteMeasure, index: &SpatialIndex, x: &[f64], r: f64) -> f64 {
    let n = measure.target_dim() as i32;
    index.ball_mass(x, r) / r.powi(n) - index.ball_mass(x, 2.0 * r) / (2.0 * r).powi(n)
}

/// Σ w_i K(|p_i − x|²) over the points within `radius`, in tree order.
pub fn kernel_sum<K: Fn(f64) -> f64>(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    x: &[f64],
    radius: f64,
    kernel: K,
) -> f64 {
    let w = measure.weights();
    let mut acc = 0.0;
    index.visit_ball(x, radius, |i, d2| acc += w[i] * kernel(d2));
    acc
}

fn smooth_radius(measure: &DiscreteMeasure, spec: &KernelSpec, largest_scale: f64) -> f64 {
    let r = spec.truncation_factor() * largest_scale;
    match spec.family() {
        crate::kernels::KernelFamily::InversePower { .. } => r.min(measure.diameter()),
        _ => r,
    }
}

fn require_smooth(spec: &KernelSpec) -> Result<()> {
    if spec.is_smooth() {
        Ok(())
    } else {
        Err(Error::UnsupportedKernel("square functions need a smooth profile".to_string()))
    }
}

/// Δ_{μ,φ}(x,t) = ∫ (φ_t − φ_{2t})(y − x) dμ(y).
pub fn delta_smooth(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    spec: &KernelSpec,
    x: &[f64],
    t: f64,
) -> Result<f64> {
    delta_k(measure, index, spec, x, t, 1, true)
}

/// ∂̃Δ_{μ,φ}(x,t) = ∫ t∂_tφ_t(y − x) dμ(y).
pub fn delta_smooth_dt(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    spec: &KernelSpec,
    x: &[f64],
    t: f64,
) -> Result<f64> {
    delta_k(measure, index, spec, x, t, 1, false)
}

/// Δ^k_{μ,φ} (`discrete`) or ∂̃Δ^k_{μ,φ}, 1 ≤ k ≤ 4.
pub fn delta_k(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    spec: &KernelSpec,
    x: &[f64],
    t: f64,
    k: usize,
    discrete: bool,
) -> Result<f64> {
    require_smooth(spec)?;
    if k == 0 || k > crate::kernels::MAX_DERIVATIVE_ORDER {
        return Err(invalid("order k must be in 1..=4"));
    }
    if !(t >= measure.resolution() * (1.0 - 1e-12)) {
        return Err(Error::Range { scale: t, min: measure.resolution(), max: f64::INFINITY });
    }
    if discrete {
        let radius = smooth_radius(measure, spec, t * (1u64 << k) as f64);
        Ok(kernel_sum(measure, index, x, radius, |d2| spec.difference_kernel_r2(d2, t, k).unwrap_or(f64::NAN)))
    } else {
        let radius = smooth_radius(measure, spec, t);
        Ok(kernel_sum(measure, index, x, radius, |d2| spec.dk_phi_r2(d2, t, k).unwrap_or(f64::NAN)))
    }
}

/// A multiscale functional evaluated at (center, scale).
#[derive(Debug, Clone, PartialEq)]
pub enum Functional {
    DeltaDensity,
    DeltaSmooth(KernelSpec),
    DeltaSmoothDt(KernelSpec),
    DeltaSmoothK(KernelSpec, usize),
    DeltaSmoothDtK(KernelSpec, usize),
    Beta1,
    Beta2,
    AlphaCoeff,
    WcdDefect,
}

impl Functional {
    pub fn name(&self) -> String {
        match self {
            Functional::DeltaDensity => "delta-density".into(),
            Functional::DeltaSmooth(s) => alloc::format!("delta-smooth[{}]", s.family()),
            Functional::DeltaSmoothDt(s) => alloc::format!("delta-smooth-dt[{}]", s.family()),
            Functional::DeltaSmoothK(s, k) => alloc::format!("delta-smooth-k{k}[{}]", s.family()),
            Functional::DeltaSmoothDtK(s, k) => alloc::format!("delta-smooth-dt-k{k}[{}]", s.family()),
            Functional::Beta1 => "beta1".into(),
            Functional::Beta2 => "beta2".into(),
            Functional::AlphaCoeff => "alpha".into(),
            Functional::WcdDefect => "wcd-defect".into(),
        }
    }

    /// Value at support point `center` and scale `r`.
    pub fn evaluate(&self, measure: &DiscreteMeasure, index: &SpatialIndex, center: usize, r: f64) -> Result<f64> {
        let x = measure.point(center);
        match self {
            Functional::DeltaDensity => delta_density(measure, index, x, r),
            Functional::DeltaSmooth(s) => delta_k(measure, index, s, x, r, 1, true),
            Functional::DeltaSmoothDt(s) => delta_k(measure, index, s, x, r, 1, false),
            Functional::DeltaSmoothK(s, k) => delta_k(measure, index, s, x, r, *k, true),
            Functional::DeltaSmoothDtK(s, k) => delta_k(measure, index, s, x, r, *k, false),
            Functional::Beta1 => geometry::beta1(measure, index, x, r).map(|b| b.value),
            Functional::Beta2 => geometry::beta2(measure, index, x, r).map(|b| b.value),
            Functional::AlphaCoeff => {
                geometry::alpha_coeff(measure, index, x, r, &geometry::AlphaConfig::default()).map(|a| a.value)
            }
            Functional::WcdDefect => {
                uniformity::wcd_defect(measure, index, x, r, &uniformity::WcdConfig::default()).map(|w| w.defect)
            }
        }
    }
}

/// Geometric scale grid `…, hi/ratio, hi` down to `lo`, clamped to
/// `[resolution, diam]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScaleGrid {
    pub scales: Vec<f64>,
    pub ratio: f64,
}

impl ScaleGrid {
    pub fn new(measure: &DiscreteMeasure, lo: f64, hi: f64, ratio: f64) -> Result<Self> {
        if !(ratio > 1.0) {
            return Err(invalid("scale grid ratio must exceed 1"));
        }
        let lo = lo.max(measure.resolution());
        let hi = hi.min(measure.diameter().max(measure.resolution()));
        // anchored at the top so dyadic ball radii fall on grid points
        let mut scales = Vec::new();
        let mut k = 0;
        loop {
            let r = hi / ratio.powi(k);
            if r < lo * (1.0 - 1e-12) {
                break;
            }
            scales.push(r);
            k += 1;
        }
        scales.reverse();
        if scales.is_empty() {
            return Err(invalid("scale grid is empty after clamping to [resolution, diameter]"));
        }
        Ok(ScaleGrid { scales, ratio })
    }

    /// A grid given explicitly; `ratio` is the spacing used for dr/r sums.
    pub fn explicit(scales: Vec<f64>, ratio: f64) -> Result<Self> {
        if scales.is_empty() || scales.windows(2).any(|w| !(w[1] > w[0])) || !(scales[0] > 0.0) {
            return Err(invalid("scales must be positive and strictly increasing"));
        }
        if !(ratio > 1.0) {
            return Err(invalid("scale grid ratio must exceed 1"));
        }
        Ok(ScaleGrid { scales, ratio })
    }

    pub fn log_step(&self) -> f64 {
        self.ratio.ln()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PoisonedCell {
    pub center: usize,
    pub scale: usize,
    pub message: String,
}

/// Values v(x_i, r_j) of a functional on a (center, scale) grid, row-major
/// by center.
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    pub functional: Functional,
    pub centers: CenterSample,
    pub grid: ScaleGrid,
    pub values: Vec<f64>,
    /// cells near the edge of the data (distance < 2r)
    pub flagged: Vec<bool>,
    pub poisoned: Vec<PoisonedCell>,
}

impl CoefficientField {
    pub fn value(&self, center: usize, scale: usize) -> f64 {
        self.values[center * self.grid.scales.len() + scale]
    }

    pub fn is_flagged(&self, center: usize, scale: usize) -> bool {
        self.flagged[center * self.grid.scales.len() + scale]
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.centers.len(), self.grid.scales.len())
    }

    /// Builds the field from per-cell results in row-major order; failed
    /// cells become NaN and are listed in `poisoned`.
    pub fn assemble(
        measure: &DiscreteMeasure,
        functional: Functional,
        centers: CenterSample,
        grid: ScaleGrid,
        results: Vec<Result<f64>>,
    ) -> Self {
        let m = grid.scales.len();
        assert_eq!(results.len(), centers.len() * m);
        let edges = EdgeModel::new(measure);
        let mut values = Vec::with_capacity(results.len());
        let mut poisoned = Vec::new();
        let mut flagged = Vec::with_capacity(results.len());
        for (cell, res) in results.into_iter().enumerate() {
            let (ci, sj) = (cell / m, cell % m);
            match res {
                Ok(v) if v.is_finite() => values.push(v),
                Ok(v) => {
                    values.push(f64::NAN);
                    poisoned.push(PoisonedCell { center: ci, scale: sj, message: alloc::format!("non-finite value {v}") });
                }
                Err(e) => {
                    values.push(f64::NAN);
                    poisoned.push(PoisonedCell { center: ci, scale: sj, message: e.to_string() });
                }
            }
            let x = measure.point(centers.indices[ci]);
            flagged.push(edges.distance(x) < 2.0 * grid.scales[sj]);
        }
        CoefficientField { functional, centers, grid, values, flagged, poisoned }
    }
}

/// Checks that the grids make sense for a field over this measure.
pub fn validate_field_inputs(measure: &DiscreteMeasure, centers: &CenterSample, grid: &ScaleGrid) -> Result<()> {
    if centers.is_empty() {
        return Err(invalid("no centers"));
    }
    if let Some(&c) = centers.indices.iter().find(|&&c| c >= measure.len()) {
        return Err(invalid(alloc::format!("center index {c} out of range")));
    }
    let hi = measure.diameter().max(measure.resolution());
    for &r in &grid.scales {
        check_scale(r, measure.resolution(), hi)?;
    }
    Ok(())
}

/// Evaluates `functional` on every (center, scale) cell.
pub fn coefficient_field(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    functional: Functional,
    centers: CenterSample,
    grid: ScaleGrid,
) -> Result<CoefficientField> {
    validate_field_inputs(measure, &centers, &grid)?;
    let mut results = Vec::with_capacity(centers.len() * grid.scales.len());
    for &c in &centers.indices {
        for &r in &grid.scales {
            results.push(functional.evaluate(measure, index, c, r));
        }
    }
    Ok(CoefficientField::assemble(measure, functional, centers, grid, results))
}

/// Σ_j |v(x, r_j)|² ln(ratio): the discretized ∫|v(x, r)|² dr/r at one
/// support point over the scales of `grid`.
pub fn square_function_at(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    functional: &Functional,
    center: usize,
    grid: &ScaleGrid,
) -> Result<f64> {
    let mut total = 0.0;
    for &r in &grid.scales {
        let v = functional.evaluate(measure, index, center, r)?;
        total += v * v;
    }
    Ok(total * grid.log_step())
}

/// Distance from a point to the edge of the data, measured in the span of
/// the top-n principal directions: an interval for n = 1, the convex hull
/// for n = 2, the bounding box otherwise.
#[derive(Debug, Clone)]
pub struct EdgeModel {
    mean: Vec<f64>,
    axes: Vec<Vec<f64>>,
    hull: Vec<[f64; 2]>,
    lo: Vec<f64>,
    hi: Vec<f64>,
}

impl EdgeModel {
    pub fn new(measure: &DiscreteMeasure) -> Self {
        let d = measure.ambient_dim();
        let n = measure.target_dim();
        let total: f64 = measure.weights().iter().sum();
        let mut mean = alloc::vec![0.0; d];
        for (p, w) in measure.points().zip(measure.weights()) {
            for k in 0..d {
                mean[k] += w * p[k] / total;
            }
        }
        let mut cov = alloc::vec![0.0; d * d];
        for (p, w) in measure.points().zip(measure.weights()) {
            for a in 0..d {
                for b in 0..d {
                    cov[a * d + b] += w * (p[a] - mean[a]) * (p[b] - mean[b]);
                }
            }
        }
        let (_, vecs) = symmetric_eigen(&cov, d);
        let axes: Vec<Vec<f64>> = vecs.into_iter().take(n).collect();
        let project = |p: &[f64]| -> Vec<f64> {
            let c: Vec<f64> = p.iter().zip(&mean).map(|(a, b)| a - b).collect();
            axes.iter().map(|ax| dot(ax, &c)).collect()
        };
        let mut lo = alloc::vec![f64::INFINITY; n];
        let mut hi = alloc::vec![f64::NEG_INFINITY; n];
        let mut planar = Vec::new();
        for p in measure.points() {
            let q = project(p);
            for k in 0..n {
                lo[k] = lo[k].min(q[k]);
                hi[k] = hi[k].max(q[k]);
            }
            if n == 2 {
                planar.push([q[0], q[1]]);
            }
        }
        let hull = if n == 2 { convex_hull(planar) } else { Vec::new() };
        EdgeModel { mean, axes, hull, lo, hi }
    }

    pub fn distance(&self, x: &[f64]) -> f64 {
        let c: Vec<f64> = x.iter().zip(&self.mean).map(|(a, b)| a - b).collect();
        let q: Vec<f64> = self.axes.iter().map(|ax| dot(ax, &c)).collect();
        if self.hull.len() >= 3 {
            return hull_distance(&self.hull, [q[0], q[1]]);
        }
        q.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (l, h))| (v - l).min(h - v))
            .fold(f64::INFINITY, f64::min)
            .max(0.0)
    }
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

/// Andrew's monotone chain, counter-clockwise without collinear points.
fn convex_hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    pts.dedup();
    if pts.len() < 3 {
        return pts;
    }
    let mut lower: Vec<[f64; 2]> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<[f64; 2]> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

fn hull_distance(hull: &[[f64; 2]], p: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..hull.len() {
        let a = hull[i];
        let b = hull[(i + 1) % hull.len()];
        let (ex, ey) = (b[0] - a[0], b[1] - a[1]);
        let len = (ex * ex + ey * ey).sqrt();
        if len == 0.0 {
            continue;
        }
        // signed distance to the supporting line, positive inside (ccw hull)
        let dist = (ex * (p[1] - a[1]) - ey * (p[0] - a[0])) / len;
        best = best.min(dist);
    }
    best.max(0.0)
}

/// A ball B(center, radius) used as a Carleson box.
#[derive(Debug, Clone, PartialEq)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BallRecord {
    pub center: Vec<f64>,
    pub radius: f64,
    /// R^{-n} Σ_{r_j ≤ R} Σ_{x_i ∈ B} |v(x_i, r_j)|² ŵ_i ln(ratio)
    pub value: f64,
    pub centers_used: usize,
    pub scales_used: usize,
    /// log2(R / r_min)
    pub log_scale_span: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CarlesonReport {
    pub functional: String,
    pub records: Vec<BallRecord>,
    pub sup: f64,
    /// least-squares slope of V against log2(R / r_min)
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
    pub r_min: f64,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct CarlesonOptions {
    /// drop cells flagged as near the edge of the data
    pub exclude_flagged: bool,
}

/// Discretized Carleson box sums of |v|² dμ dr/r, normalized by R^n.
pub fn carleson_norm(
    field: &CoefficientField,
    measure: &DiscreteMeasure,
    balls: &[Ball],
    options: CarlesonOptions,
) -> Result<CarlesonReport> {
    let n = measure.target_dim() as i32;
    let scales = &field.grid.scales;
    let r_min = scales[0];
    let dlog = field.grid.log_step();
    let r_top = scales[scales.len() - 1] * field.grid.ratio.sqrt();
    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for ball in balls {
        if !(ball.radius >= r_min * (1.0 - 1e-12)) || ball.radius > r_top * (1.0 + 1e-12) {
            return Err(Error::Range { scale: ball.radius, min: r_min, max: r_top });
        }
        let used_scales = scales.iter().take_while(|&&r| r <= ball.radius * (1.0 + 1e-12)).count();
        let mut total = 0.0;
        let mut used = 0usize;
        for (ci, &c) in field.centers.indices.iter().enumerate() {
            let x = measure.point(c);
            if crate::measure::dist2(x, &ball.center) > ball.radius * ball.radius {
                continue;
            }
            used += 1;
            let w = field.centers.weights[ci];
            for sj in 0..used_scales {
                if options.exclude_flagged && field.is_flagged(ci, sj) {
                    continue;
                }
                let v = field.value(ci, sj);
                if v.is_finite() {
                    total += v * v * w * dlog;
                }
            }
        }
        if used == 0 {
            warnings.push(alloc::format!("ball of radius {} contains no sampled centers; skipped", ball.radius));
            continue;
        }
        records.push(BallRecord {
            center: ball.center.clone(),
            radius: ball.radius,
            value: total / ball.radius.powi(n),
            centers_used: used,
            scales_used: used_scales,
            log_scale_span: (ball.radius / r_min).log2(),
        });
    }
    if !field.poisoned.is_empty() {
        warnings.push(alloc::format!("{} poisoned cells ignored", field.poisoned.len()));
    }
    let sup = records.iter().map(|r| r.value).fold(0.0, f64::max);
    let xs: Vec<f64> = records.iter().map(|r| r.log_scale_span).collect();
    let ys: Vec<f64> = records.iter().map(|r| r.value).collect();
    let fit = linear_fit(&xs, &ys);
    Ok(CarlesonReport {
        functional: field.functional.name(),
        records,
        sup,
        slope: fit.slope,
        intercept: fit.intercept,
        correlation: fit.correlation,
        r_min,
        warnings,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub correlation: f64,
}

/// Ordinary least squares y ≈ slope·x + intercept with Pearson correlation
/// (0 when either variable is constant).
pub fn linear_fit(xs: &[f64], ys: &[f64]) -> LinearFit {
    let m = xs.len().min(ys.len());
    if m < 2 {
        return LinearFit { slope: 0.0, intercept: ys.first().copied().unwrap_or(0.0), correlation: 0.0 };
    }
    let mf = m as f64;
    let mx = xs[..m].iter().sum::<f64>() / mf;
    let my = ys[..m].iter().sum::<f64>() / mf;
    let (mut sxx, mut syy, mut sxy) = (0.0, 0.0, 0.0);
    for i in 0..m {
        let (dx, dy) = (xs[i] - mx, ys[i] - my);
        sxx += dx * dx;
        syy += dy * dy;
        sxy += dx * dy;
    }
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let correlation = if sxx > 0.0 && syy > 0.0 { sxy / (sxx * syy).sqrt() } else { 0.0 };
    LinearFit { slope, intercept: my - slope * mx, correlation }
}
