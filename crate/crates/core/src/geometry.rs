//! Jones β numbers, the α coefficient built on dist_B, and α packing sums.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;


use crate::error::{invalid, Result};
use crate::lattice::{cube_ball, CubeLattice};
use crate::linalg::{dot, symmetric_eigen};
use crate::measure::{dist2, DiscreteMeasure};
use crate::spatial::SpatialIndex;
use crate::transport::{flat_norm_distance, AtomSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FitKind {
    L1,
    L2,
}

/// An affine n-plane `base + span(basis)` with the orthonormal complement
/// `normals`.
#[derive(Debug, Clone, PartialEq)]
pub struct PlaneFit {
    pub base: Vec<f64>,
    pub basis: Vec<Vec<f64>>,
    pub normals: Vec<Vec<f64>>,
    pub objective: f64,
    pub kind: FitKind,
    /// the fitted second-moment matrix had rank < n
    pub degenerate: bool,
}

impl PlaneFit {
    pub fn dist2(&self, y: &[f64]) -> f64 {
        let v: Vec<f64> = y.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        self.normals.iter().map(|nv| dot(nv, &v).powi(2)).sum::<f64>()
    }

    pub fn dist(&self, y: &[f64]) -> f64 {
        self.dist2(y).sqrt()
    }

    /// Orthogonal projection onto the plane.
    pub fn project(&self, y: &[f64]) -> Vec<f64> {
        let v: Vec<f64> = y.iter().zip(&self.base).map(|(a, b)| a - b).collect();
        let mut out = self.base.clone();
        for b in &self.basis {
            let c = dot(b, &v);
            out.iter_mut().zip(b).for_each(|(o, bk)| *o += c * bk);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BetaResult {
    pub value: f64,
    pub plane: PlaneFit,
}

/// Weighted PCA plane through the weighted mean.
fn pca_plane(points: &[&[f64]], weights: &[f64], n: usize, kind: FitKind) -> PlaneFit {
    let d = points[0].len();
    let total: f64 = weights.iter().sum();
    let mut base = alloc::vec![0.0; d];
    for (p, w) in points.iter().zip(weights) {
        base.iter_mut().zip(p.iter()).for_each(|(b, x)| *b += w * x);
    }
    base.iter_mut().for_each(|b| *b /= total);
    let mut cov = alloc::vec![0.0; d * d];
    for (p, w) in points.iter().zip(weights) {
        for a in 0..d {
            let da = p[a] - base[a];
            for b in a..d {
                cov[a * d + b] += w * da * (p[b] - base[b]);
            }
        }
    }
    for a in 0..d {
        for b in 0..a {
            cov[a * d + b] = cov[b * d + a];
        }
    }
    let (vals, mut vecs) = symmetric_eigen(&cov, d);
    let degenerate = !(vals[n - 1] > 1e-12 * vals[0].abs().max(f64::MIN_POSITIVE));
    let normals = vecs.split_off(n);
    PlaneFit { base, basis: vecs, normals, objective: 0.0, kind, degenerate }
}

fn l1_objective(plane: &PlaneFit, points: &[&[f64]], weights: &[f64]) -> f64 {
    points.iter().zip(weights).map(|(p, w)| w * plane.dist(p)).sum()
}

fn ball_points<'a>(measure: &'a DiscreteMeasure, index: &SpatialIndex, x: &[f64], r: f64) -> (Vec<&'a [f64]>, Vec<f64>) {
    let ids = index.indices_in_ball(x, r);
    (ids.iter().map(|&i| measure.point(i)).collect(), ids.iter().map(|&i| measure.weight(i)).collect())
}

fn require_points(count: usize, n: usize) -> Result<()> {
    if count < n + 1 {
        return Err(invalid(alloc::format!("ball holds {count} points, need at least {}", n + 1)));
    }
    Ok(())
}

/// L2 companion of β₁: (Σ w·dist²(y, L) / r^{n+2})^{1/2} for the
/// second-moment plane of the points in B(x, r).
pub fn beta2(measure: &DiscreteMeasure, index: &SpatialIndex, x: &[f64], r: f64) -> Result<BetaResult> {
    let n = measure.target_dim();
    let (pts, w) = ball_points(measure, index, x, r);
    require_points(pts.len(), n)?;
    let mut plane = pca_plane(&pts, &w, n, FitKind::L2);
    plane.objective = pts.iter().zip(&w).map(|(p, wi)| wi * plane.dist2(p)).sum();
    Ok(BetaResult { value: (plane.objective / r.powi(n as i32 + 2)).sqrt(), plane })
}

/// IRLS iteration cap for β₁.
pub const IRLS_MAX_ITERATIONS: usize = 50;

/// β₁(x, r) = inf_L Σ w·dist(y, L) / r^{n+1}, approximated by iteratively
/// reweighted least squares started from the β₂ plane.
pub fn beta1(measure: &DiscreteMeasure, index: &SpatialIndex, x: &[f64], r: f64) -> Result<BetaResult> {
    let n = measure.target_dim();
    let (pts, w) = ball_points(measure, index, x, r);
    require_points(pts.len(), n)?;
    let plane = irls_plane(&pts, &w, n, r);
    Ok(BetaResult { value: plane.objective / r.powi(n as i32 + 1), plane })
}

fn irls_plane(pts: &[&[f64]], w: &[f64], n: usize, r: f64) -> PlaneFit {
    let mut best = pca_plane(pts, w, n, FitKind::L1);
    best.objective = l1_objective(&best, pts, w);
    let floor = 1e-6 * r;
    let tol = 1e-10 * w.iter().sum::<f64>() * r;
    let mut reweighted = alloc::vec![0.0; w.len()];
    for _ in 0..IRLS_MAX_ITERATIONS {
        for ((rw, p), wi) in reweighted.iter_mut().zip(pts).zip(w) {
            *rw = wi / best.dist(p).max(floor);
        }
        let mut cand = pca_plane(pts, &reweighted, n, FitKind::L1);
        cand.objective = l1_objective(&cand, pts, w);
        if !(cand.objective < best.objective) {
            break;
        }
        let gain = best.objective - cand.objective;
        best = cand;
        if gain < tol {
            break;
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaConfig {
    /// plane grid pitch is r / pitch_divisor
    pub pitch_divisor: f64,
    /// rotations k·angle_step for k = -angle_steps..=angle_steps
    pub angle_steps: usize,
    pub angle_step: f64,
    /// number of normal offsets, spaced offset_step·r and centered on 0
    pub offsets: usize,
    pub offset_step: f64,
    /// candidates that get a golden-section search over c
    pub refine: usize,
    pub golden_iterations: usize,
    /// μ is aggregated onto a coarser grid when more atoms than this lie in B
    pub atom_budget: usize,
    /// coarser plane grid and atom budget used only to rank the candidates
    pub screen_pitch_divisor: f64,
    pub screen_atom_budget: usize,
}

impl Default for AlphaConfig {
    fn default() -> Self {
        AlphaConfig {
            pitch_divisor: 40.0,
            angle_steps: 3,
            angle_step: 0.1,
            offsets: 5,
            offset_step: 0.05,
            refine: 3,
            golden_iterations: 16,
            atom_budget: 96,
            screen_pitch_divisor: 10.0,
            screen_atom_budget: 40,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlphaResult {
    pub value: f64,
    pub c: f64,
    pub plane: PlaneFit,
    /// number of dist_B evaluations
    pub evaluations: usize,
}

/// Atoms of μ inside the closed ball, aggregated to mass centroids on a
/// grid (in the frame of `plane`) whenever there are more than `budget`.
fn aggregate_atoms(pts: &[&[f64]], w: &[f64], x: &[f64], r: f64, frame: &[Vec<f64>], budget: usize) -> AtomSet {
    let d = x.len();
    let mut out = AtomSet::new(d);
    if pts.len() <= budget {
        for (p, wi) in pts.iter().zip(w) {
            out.push(p, *wi);
        }
        return out;
    }
    let mut pitch = 2.0 * r / budget as f64;
    loop {
        let mut cells: BTreeMap<Vec<i64>, (f64, Vec<f64>)> = BTreeMap::new();
        for (p, wi) in pts.iter().zip(w) {
            let v: Vec<f64> = p.iter().zip(x).map(|(a, b)| a - b).collect();
            // cells centered on x so flipping a frame vector maps cells onto cells
            let key: Vec<i64> = frame.iter().map(|e| (dot(e, &v) / pitch).round() as i64).collect();
            let cell = cells.entry(key).or_insert_with(|| (0.0, alloc::vec![0.0; d]));
            cell.0 += wi;
            cell.1.iter_mut().zip(p.iter()).for_each(|(s, c)| *s += wi * c);
        }
        if cells.len() <= budget {
            for (_, (m, s)) in cells {
                let c: Vec<f64> = s.iter().map(|v| v / m).collect();
                out.push(&c, m);
            }
            return out;
        }
        pitch *= 1.5;
    }
}

/// Unit-mass grid of pitch `pitch` on L ∩ B(x, reach).
fn plane_grid(plane: &PlaneFit, x: &[f64], reach: f64, pitch: f64) -> AtomSet {
    let d = x.len();
    let n = plane.basis.len();
    let foot = plane.project(x);
    let h2 = reach * reach - dist2(x, &foot);
    let mut out = AtomSet::new(d);
    if h2 < 0.0 {
        return out;
    }
    let kmax = (h2.sqrt() / pitch).floor() as i64;
    let mut idx = alloc::vec![-kmax; n];
    let cell = pitch.powi(n as i32);
    let mut p = alloc::vec![0.0; d];
    loop {
        let s2: f64 = idx.iter().map(|&k| (k as f64 * pitch).powi(2)).sum();
        if s2 <= h2 {
            p.copy_from_slice(&foot);
            for (b, &k) in plane.basis.iter().zip(&idx) {
                p.iter_mut().zip(b).for_each(|(pk, bk)| *pk += k as f64 * pitch * bk);
            }
            out.push(&p, cell);
        }
        let mut a = 0;
        loop {
            if a == n {
                return out;
            }
            idx[a] += 1;
            if idx[a] <= kmax {
                break;
            }
            idx[a] = -kmax;
            a += 1;
        }
    }
}

fn scaled(grid: &AtomSet, c: f64) -> AtomSet {
    AtomSet { coords: grid.coords.clone(), masses: grid.masses.iter().map(|m| m * c).collect(), dim: grid.dim }
}

/// Candidate planes: rotations of the first basis vector toward the first
/// normal about the foot of x, times normal offsets; every candidate is
/// moved, if needed, so that it meets B(x, r/2).
fn candidate_planes(base: &PlaneFit, x: &[f64], r: f64, cfg: &AlphaConfig) -> Vec<PlaneFit> {
    let mut out = Vec::new();
    if base.normals.is_empty() {
        return alloc::vec![base.clone()];
    }
    let foot = base.project(x);
    let steps = cfg.angle_steps as i64;
    let half = (cfg.offsets as f64 - 1.0) / 2.0;
    for k in -steps..=steps {
        let theta = k as f64 * cfg.angle_step;
        let (s, c) = theta.sin_cos();
        let mut plane = base.clone();
        let u = base.basis[0].clone();
        let v = base.normals[0].clone();
        plane.basis[0] = u.iter().zip(&v).map(|(a, b)| c * a + s * b).collect();
        plane.normals[0] = u.iter().zip(&v).map(|(a, b)| -s * a + c * b).collect();
        plane.base = foot.clone();
        for o in 0..cfg.offsets {
            let shift = (o as f64 - half) * cfg.offset_step * r;
            let mut cand = plane.clone();
            cand.base.iter_mut().zip(&plane.normals[0]).for_each(|(b, nv)| *b += shift * nv);
            let f = cand.project(x);
            let gap = dist2(x, &f).sqrt();
            if gap > 0.5 * r {
                let t = 1.0 - 0.5 * r / gap;
                cand.base.iter_mut().zip(x.iter().zip(&f)).for_each(|(b, (xi, fi))| *b += t * (xi - fi));
            }
            out.push(cand);
        }
    }
    out
}

fn golden_min<F: FnMut(f64) -> Result<f64>>(lo: f64, hi: f64, iters: usize, mut f: F) -> Result<(f64, f64)> {
    let g = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let mut f1 = f(x1)?;
    let mut f2 = f(x2)?;
    let mut best = if f1 <= f2 { (x1, f1) } else { (x2, f2) };
    for _ in 0..iters {
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1)?;
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2)?;
        }
        for (xv, fv) in [(x1, f1), (x2, f2)] {
            if fv < best.1 {
                best = (xv, fv);
            }
        }
    }
    Ok(best)
}

/// α(B(x, r)) = r^{-(n+1)} inf_{c ≥ 0, L} dist_B(μ, cH^n|_L), estimated over
/// a finite family of planes around the β₁ plane with c found by
/// golden-section search. Candidates are ranked on a coarse discretization;
/// the best few are then searched with the flat measure as a grid of pitch
/// ≤ r/40 on L ∩ 1.5B. The result is an upper-bound estimator.
pub fn alpha_coeff(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    x: &[f64],
    r: f64,
    cfg: &AlphaConfig,
) -> Result<AlphaResult> {
    let n = measure.target_dim();
    let (pts, w) = ball_points(measure, index, x, r);
    if pts.is_empty() {
        return Err(invalid("the ball does not meet the support"));
    }
    let mass: f64 = w.iter().sum();
    let base = if pts.len() > n {
        irls_plane(&pts, &w, n, r)
    } else {
        // too few atoms to span a plane: use the coordinate frame through x
        let d = x.len();
        let frame: Vec<Vec<f64>> = (0..d).map(|k| (0..d).map(|j| if j == k { 1.0 } else { 0.0 }).collect()).collect();
        PlaneFit {
            base: pts[0].to_vec(),
            basis: frame[..n].to_vec(),
            normals: frame[n..].to_vec(),
            objective: 0.0,
            kind: FitKind::L1,
            degenerate: true,
        }
    };
    let frame: Vec<Vec<f64>> = base.basis.iter().chain(&base.normals).cloned().collect();
    let mu = aggregate_atoms(&pts, &w, x, r, &frame, cfg.atom_budget);
    let mu_coarse = aggregate_atoms(&pts, &w, x, r, &frame, cfg.screen_atom_budget);
    let c_max = 2.0 * mass / r.powi(n as i32);
    let planes = candidate_planes(&base, x, r, cfg);
    let mut evaluations = 0usize;
    let mut eval = |mu: &AtomSet, grid: &AtomSet, c: f64| -> Result<f64> {
        evaluations += 1;
        flat_norm_distance(mu, &scaled(grid, c), x, r)
    };
    // the constant matching μ(B) with the grid mass inside B
    let matching = |grid: &AtomSet| {
        let inside: f64 = (0..grid.len()).filter(|&k| dist2(grid.point(k), x) <= r * r).map(|k| grid.masses[k]).sum();
        if inside > 0.0 {
            (mass / inside).min(c_max)
        } else {
            0.0
        }
    };
    // rank every candidate on the coarse discretization
    let mut screened: Vec<(f64, usize)> = Vec::new();
    for (i, plane) in planes.iter().enumerate() {
        let grid = plane_grid(plane, x, 1.5 * r, r / cfg.screen_pitch_divisor);
        let v = eval(&mu_coarse, &grid, matching(&grid))?;
        screened.push((v, i));
    }
    screened.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut best: Option<(f64, f64, usize)> = None;
    for &(_, i) in screened.iter().take(cfg.refine.max(1)) {
        let grid = plane_grid(&planes[i], x, 1.5 * r, r / cfg.pitch_divisor);
        let c0 = matching(&grid);
        let v0 = eval(&mu, &grid, c0)?;
        let (mut c, mut v) = golden_min(0.0, c_max, cfg.golden_iterations, |c| eval(&mu, &grid, c))?;
        if v0 <= v {
            (c, v) = (c0, v0);
        }
        if best.map_or(true, |b| v < b.0) {
            best = Some((v, c, i));
        }
    }
    let (v, c, i) = best.expect("at least one candidate plane");
    let mut plane = planes[i].clone();
    plane.objective = v;
    Ok(AlphaResult { value: v / r.powi(n as i32 + 1), c, plane, evaluations })
}

/// α(Q) := α(B_Q) for a lattice cube.
pub fn cube_alpha(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    lattice: &CubeLattice,
    cube: usize,
    cfg: &AlphaConfig,
) -> Result<AlphaResult> {
    let (center, radius) = cube_ball(measure, lattice.cube(cube));
    alpha_coeff(measure, index, &center, radius, cfg)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PackingAudit {
    pub root: usize,
    /// relative depth below the root of each entry of `ratio_by_depth`
    pub depths: Vec<u32>,
    /// Σ_{Q ⊂ R, depth(Q) ≤ k} α(Q)² μ(Q) / μ(R)
    pub ratio_by_depth: Vec<f64>,
    /// (cube id, α) for every cube used
    pub alphas: Vec<(usize, f64)>,
}

impl PackingAudit {
    pub fn ratio(&self) -> f64 {
        self.ratio_by_depth.last().copied().unwrap_or(0.0)
    }

    /// Least-squares slope of the ratio per generation.
    pub fn slope(&self) -> f64 {
        let xs: Vec<f64> = self.depths.iter().map(|&d| d as f64).collect();
        crate::square::linear_fit(&xs, &self.ratio_by_depth).slope
    }
}

/// Combines per-cube α values into the normalized packing sums of `root`.
pub fn packing_from_alphas(lattice: &CubeLattice, root: usize, depth: u32, alphas: Vec<(usize, f64)>) -> PackingAudit {
    let top = lattice.cube(root).generation;
    let total = lattice.cube(root).mass;
    let mut per_depth = alloc::vec![0.0; depth as usize + 1];
    for &(id, a) in &alphas {
        let q = lattice.cube(id);
        per_depth[(q.generation - top) as usize] += a * a * q.mass;
    }
    let mut acc = 0.0;
    let ratio_by_depth = per_depth
        .iter()
        .map(|s| {
            acc += s;
            acc / total
        })
        .collect();
    PackingAudit { root, depths: (0..=depth).collect(), ratio_by_depth, alphas }
}

/// Σ_{Q ⊂ R} α(Q)² μ(Q) / μ(R) over the descendants of `root` down to
/// `depth` generations below it (clamped to the lattice depth).
pub fn alpha_packing_audit(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    lattice: &CubeLattice,
    root: usize,
    depth: u32,
    cfg: &AlphaConfig,
) -> Result<PackingAudit> {
    let depth = depth.min(lattice.jmax - lattice.cube(root).generation);
    let mut alphas = Vec::new();
    for id in lattice.descendants(root, depth) {
        alphas.push((id, cube_alpha(measure, index, lattice, id, cfg)?.value));
    }
    Ok(packing_from_alphas(lattice, root, depth, alphas))
}

/// The generation-`generation` cube whose center lies farthest from the
/// edge of the data (lowest id on ties). Packing sums below it avoid balls
/// that reach past the end of a finite sample.
pub fn interior_cube(lattice: &CubeLattice, measure: &DiscreteMeasure, generation: u32) -> Result<usize> {
    if generation > lattice.jmax {
        return Err(invalid("generation below the deepest lattice generation"));
    }
    let edges = crate::square::EdgeModel::new(measure);
    let mut best: Option<(f64, usize)> = None;
    for q in lattice.generation(generation) {
        let dist = edges.distance(measure.point(q.center));
        if best.map_or(true, |(d, id)| dist > d || (dist == d && q.id < id)) {
            best = Some((dist, q.id));
        }
    }
    best.map(|(_, id)| id).ok_or_else(|| invalid("empty generation"))
}
