//! Weighted point clouds standing in for μ = h·H^n restricted to a set E.

use alloc::vec::Vec;
#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::error::{invalid, Error, Result};
use crate::spatial::SpatialIndex;

/// Multiple of the minimum spacing used as the default resolution.
pub const RESOLUTION_FACTOR: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteMeasure {
    coords: Vec<f64>,
    weights: Vec<f64>,
    d: usize,
    n: usize,
    resolution: f64,
    diameter: f64,
}

impl DiscreteMeasure {
    /// Builds a measure from flat coordinates (`d` per point). Exact
    /// duplicate points are merged and their weights added. The resolution
    /// defaults to `3 × min_spacing`.
    pub fn new(coords: Vec<f64>, weights: Vec<f64>, d: usize, n: usize) -> Result<Self> {
        if d == 0 || n == 0 || n >= d {
            return Err(invalid("dimensions must satisfy 0 < n < d"));
        }
        if weights.is_empty() {
            return Err(invalid("a measure needs at least one point"));
        }
        if coords.len() != weights.len() * d {
            return Err(invalid("every point needs exactly d coordinates"));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(invalid("coordinates must be finite"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(invalid("weights must be finite and positive"));
        }
        let (coords, weights) = merge_duplicates(coords, weights, d);
        // a lone atom has no sampling scale; any positive scale is admissible
        let mut m = DiscreteMeasure { coords, weights, d, n, resolution: f64::MIN_POSITIVE, diameter: 0.0 };
        m.diameter = m.compute_diameter();
        if m.len() >= 2 {
            m.resolution = RESOLUTION_FACTOR * min_spacing(&m)?;
            if m.resolution > m.diameter {
                m.resolution = m.diameter;
            }
        }
        Ok(m)
    }

    pub fn from_points(points: &[Vec<f64>], weights: Vec<f64>, n: usize) -> Result<Self> {
        let d = points.first().map_or(0, |p| p.len());
        if points.iter().any(|p| p.len() != d) {
            return Err(invalid("every point needs exactly d coordinates"));
        }
        Self::new(points.iter().flatten().copied().collect(), weights, d, n)
    }

    /// Overrides the finest trustworthy scale.
    pub fn with_resolution(mut self, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0) || (self.len() >= 2 && resolution > self.diameter) {
            return Err(invalid("resolution must lie in (0, diameter]"));
        }
        self.resolution = resolution;
        Ok(self)
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn ambient_dim(&self) -> usize {
        self.d
    }

    pub fn target_dim(&self) -> usize {
        self.n
    }

    pub fn resolution(&self) -> f64 {
        self.resolution
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.d..(i + 1) * self.d]
    }

    pub fn points(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.coords.chunks_exact(self.d)
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn weight(&self, i: usize) -> f64 {
        self.weights[i]
    }

    pub fn total_mass(&self) -> f64 {
        crate::exact_sum::exact_sum(self.weights.iter().copied())
    }

    pub fn build_index(&self) -> SpatialIndex {
        SpatialIndex::build(&self.coords, &self.weights, self.d)
    }

    /// Applies `x ↦ λx`, `w ↦ λ^n w`; every density ratio is preserved.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        let coords = self.coords.iter().map(|c| c * lambda).collect();
        let factor = lambda.powi(self.n as i32);
        let weights = self.weights.iter().map(|w| w * factor).collect();
        let mut m = DiscreteMeasure::new(coords, weights, self.d, self.n)?;
        m.resolution = self.resolution * lambda;
        Ok(m)
    }

    /// Multiplies every weight by `factor`.
    pub fn scale_weights(&self, factor: f64) -> Result<Self> {
        let mut m = self.clone();
        if !(factor > 0.0) {
            return Err(invalid("weight factor must be positive"));
        }
        m.weights.iter_mut().for_each(|w| *w *= factor);
        Ok(m)
    }

    /// Applies an affine map `x ↦ A x + b` with `A` given row-major (d×d).
    pub fn transform(&self, matrix: &[f64], shift: &[f64]) -> Result<Self> {
        let d = self.d;
        if matrix.len() != d * d || shift.len() != d {
            return Err(invalid("transform has the wrong shape"));
        }
        let mut coords = Vec::with_capacity(self.coords.len());
        for p in self.points() {
            for row in 0..d {
                let v: f64 = (0..d).map(|k| matrix[row * d + k] * p[k]).sum();
                coords.push(v + shift[row]);
            }
        }
        let mut m = DiscreteMeasure::new(coords, self.weights.clone(), d, self.n)?;
        m.resolution = self.resolution;
        Ok(m)
    }

    fn compute_diameter(&self) -> f64 {
        let all: Vec<usize> = (0..self.len()).collect();
        subset_diameter(&self.coords, self.d, &all)
    }
}

/// Exact diameter of the points `subset` of a flat coordinate array.
pub fn subset_diameter(coords: &[f64], d: usize, subset: &[usize]) -> f64 {
    let n = subset.len();
    if n < 2 {
        return 0.0;
    }
    let point = |i: usize| &coords[subset[i] * d..(subset[i] + 1) * d];
    // lower bound from a double sweep, then an exact pruned search
    let far_from = |p: &[f64]| {
        let mut best = (0usize, 0.0f64);
        for i in 0..n {
            let d2 = dist2(p, point(i));
            if d2 > best.1 {
                best = (i, d2);
            }
        }
        best
    };
    let (a, _) = far_from(point(0));
    let (_, mut best) = far_from(point(a));
    let mut center = alloc::vec![0.0; d];
    for k in 0..d {
        let (lo, hi) = (0..n).fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), i| {
            let v = point(i)[k];
            (l.min(v), h.max(v))
        });
        center[k] = 0.5 * (lo + hi);
    }
    let mut radial: Vec<(f64, usize)> = (0..n).map(|i| (dist2(point(i), &center).sqrt(), i)).collect();
    radial.sort_by(|x, y| y.0.total_cmp(&x.0).then(x.1.cmp(&y.1)));
    let mut best_d = best.sqrt();
    for i in 0..n {
        if radial[i].0 + radial[0].0 <= best_d {
            break;
        }
        let p = point(radial[i].1);
        for j in 0..i {
            if radial[i].0 + radial[j].0 <= best_d {
                break;
            }
            let d2 = dist2(p, point(radial[j].1));
            if d2 > best {
                best = d2;
                best_d = d2.sqrt();
            }
        }
    }
    best_d
}

fn merge_duplicates(coords: Vec<f64>, weights: Vec<f64>, d: usize) -> (Vec<f64>, Vec<f64>) {
    let n = weights.len();
    let mut order: Vec<usize> = (0..n).collect();
    let key = |i: usize| &coords[i * d..(i + 1) * d];
    order.sort_by(|&a, &b| {
        key(a)
            .iter()
            .zip(key(b))
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(core::cmp::Ordering::Equal)
            .then(a.cmp(&b))
    });
    // representative = first occurrence in input order
    let mut rep = alloc::vec![usize::MAX; n];
    let mut any_dup = false;
    for w in order.windows(2) {
        if key(w[0]) == key(w[1]) {
            let r = if rep[w[0]] == usize::MAX { w[0] } else { rep[w[0]] };
            rep[w[1]] = r;
            any_dup = true;
        }
    }
    if !any_dup {
        return (coords, weights);
    }
    let mut merged_w = weights.clone();
    for i in 0..n {
        if rep[i] != usize::MAX {
            merged_w[rep[i]] += weights[i];
        }
    }
    let mut out_c = Vec::new();
    let mut out_w = Vec::new();
    for i in 0..n {
        if rep[i] == usize::MAX {
            out_c.extend_from_slice(key(i));
            out_w.push(merged_w[i]);
        }
    }
    (out_c, out_w)
}

pub(crate) fn dist2(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn dist(a: &[f64], b: &[f64]) -> f64 {
    dist2(a, b).sqrt()
}

/// μ(B(center, radius)) over the closed ball.
pub fn ball_mass(index: &SpatialIndex, center: &[f64], radius: f64) -> f64 {
    index.ball_mass(center, radius)
}

/// Minimum pairwise distance.
pub fn min_spacing(measure: &DiscreteMeasure) -> Result<f64> {
    if measure.len() < 2 {
        return Err(invalid("min_spacing needs at least two points"));
    }
    let index = measure.build_index();
    let best = (0..measure.len())
        .filter_map(|i| index.nearest_excluding(measure.point(i), i).map(|(_, dd)| dd))
        .fold(f64::INFINITY, f64::min);
    Ok(best)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AdProfile {
    pub scales: Vec<f64>,
    pub min_ratio: Vec<f64>,
    pub max_ratio: Vec<f64>,
    /// max(max ratio, 1 / min ratio) over the grid
    pub c0: f64,
}

/// Per-scale extremes of μ(B(x,r))/r^n over the sampled centers.
pub fn ad_regularity_profile(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    centers: &[usize],
    scales: &[f64],
) -> Result<AdProfile> {
    if scales.is_empty() || centers.is_empty() {
        return Err(invalid("empty scale grid or center sample"));
    }
    if scales.windows(2).any(|w| !(w[1] > w[0])) || scales[0] <= 0.0 {
        return Err(invalid("scale grid must be positive and strictly increasing"));
    }
    if let Some(&c) = centers.iter().find(|&&c| c >= measure.len()) {
        return Err(invalid(alloc::format!("center index {c} out of range")));
    }
    let n = measure.target_dim() as i32;
    let mut min_ratio = Vec::with_capacity(scales.len());
    let mut max_ratio = Vec::with_capacity(scales.len());
    for &r in scales {
        let (lo, hi) = centers.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &c| {
            let ratio = index.ball_mass(measure.point(c), r) / r.powi(n);
            (lo.min(ratio), hi.max(ratio))
        });
        min_ratio.push(lo);
        max_ratio.push(hi);
    }
    let hi = max_ratio.iter().copied().fold(0.0, f64::max);
    let lo = min_ratio.iter().copied().fold(f64::INFINITY, f64::min);
    let c0 = hi.max(1.0 / lo).max(1.0);
    Ok(AdProfile { scales: scales.to_vec(), min_ratio, max_ratio, c0 })
}

/// `count` scales from `lo` to `hi` in geometric progression (inclusive).
pub fn geometric_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => alloc::vec![lo],
        _ => {
            let step = (hi / lo).ln() / (count - 1) as f64;
            (0..count).map(|i| lo * (step * i as f64).exp()).collect()
        }
    }
}

/// Scales `lo, lo·ratio, lo·ratio², …` not exceeding `hi` (with a relative
/// slack of 1e-12).
pub fn ratio_grid(lo: f64, hi: f64, ratio: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if !(lo > 0.0) || !(ratio > 1.0) {
        return out;
    }
    let mut k = 0;
    loop {
        let r = lo * ratio.powi(k);
        if r > hi * (1.0 + 1e-12) {
            break;
        }
        out.push(r);
        k += 1;
    }
    out
}

pub(crate) fn check_scale(scale: f64, min: f64, max: f64) -> Result<()> {
    if !(scale >= min * (1.0 - 1e-12)) || !(scale <= max * (1.0 + 1e-12)) {
        return Err(Error::Range { scale, min, max });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn segment(count: usize) -> DiscreteMeasure {
        let h = 1.0 / (count - 1) as f64;
        let coords = (0..count).flat_map(|i| [i as f64 * h, 0.0]).collect();
        DiscreteMeasure::new(coords, vec![h; count], 2, 1).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(DiscreteMeasure::new(vec![0.0, 0.0], vec![-1.0], 2, 1).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, f64::NAN], vec![1.0], 2, 1).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, 0.0, 1.0], vec![1.0], 2, 1).is_err());
        assert!(DiscreteMeasure::new(vec![0.0, 0.0], vec![1.0], 2, 2).is_err());
        assert!(DiscreteMeasure::new(vec![], vec![], 2, 1).is_err());
    }

    #[test]
    fn duplicates_merge() {
        let m = DiscreteMeasure::new(vec![0.0, 0.0, 1.0, 0.0, 0.0, 0.0], vec![1.0, 2.0, 3.0], 2, 1).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.weights(), &[4.0, 2.0]);
        assert_eq!(m.point(1), &[1.0, 0.0]);
    }

    #[test]
    fn spacing_examples() {
        let m = DiscreteMeasure::new(vec![0.0, 0.0, 0.5, 0.0, 1.0, 0.0], vec![1.0; 3], 2, 1).unwrap();
        assert_eq!(min_spacing(&m).unwrap(), 0.5);
        let s = segment(101);
        assert!((min_spacing(&s).unwrap() - 0.01).abs() < 1e-15);
        assert!((s.resolution() - 0.03).abs() < 1e-14);
        assert_eq!(s.diameter(), 1.0);
        let single = DiscreteMeasure::new(vec![0.3, 0.3], vec![1.0], 2, 1).unwrap();
        assert!(min_spacing(&single).is_err());
    }

    #[test]
    fn segment_ball_mass_and_total() {
        let s = segment(10_001);
        let idx = s.build_index();
        let h = 1e-4;
        assert!((ball_mass(&idx, &[0.5, 0.0], 0.25) - 0.5).abs() <= h * 1.0001);
        assert_eq!(ball_mass(&idx, &[0.5, 3.0], 1.0), 0.0);
        let total = s.total_mass();
        assert_eq!(ball_mass(&idx, &[0.0, 0.0], s.diameter() + h), total);
    }

    #[test]
    fn segment_profile_is_flat() {
        let s = segment(2001);
        let idx = s.build_index();
        let centers: Vec<usize> = (400..=1600).step_by(40).collect();
        let scales = geometric_grid(0.01, 0.2, 8);
        let p = ad_regularity_profile(&s, &idx, &centers, &scales).unwrap();
        let h = 1.0 / 2000.0;
        for (k, &r) in scales.iter().enumerate() {
            assert!((p.min_ratio[k] - 2.0).abs() <= 3.0 * h / r);
            assert!((p.max_ratio[k] - 2.0).abs() <= 3.0 * h / r);
        }
        assert!(p.c0 >= 1.0 && p.c0 < 2.1);
    }

    #[test]
    fn point_mass_profile() {
        let m = DiscreteMeasure::new(vec![0.0, 0.0], vec![1.0], 2, 1).unwrap();
        let idx = m.build_index();
        let p = ad_regularity_profile(&m, &idx, &[0], &[0.1, 1.0, 10.0]).unwrap();
        assert_eq!(p.max_ratio, vec![10.0, 1.0, 0.1]);
        assert!(p.c0.is_finite() && p.c0 == 10.0);
        assert!(ad_regularity_profile(&m, &idx, &[], &[1.0]).is_err());
        assert!(ad_regularity_profile(&m, &idx, &[0], &[]).is_err());
    }

    #[test]
    fn grids() {
        let g = ratio_grid(1.0, 8.0, 2.0);
        assert_eq!(g, vec![1.0, 2.0, 4.0, 8.0]);
        let g = geometric_grid(0.01, 0.2, 5);
        assert!((g[4] - 0.2).abs() < 1e-15 && g[0] == 0.01);
    }
}
