//! Deterministic generators for the example geometries.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;
use core::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{invalid, Result};
use crate::measure::DiscreteMeasure;
use crate::quadrature::GaussLegendre;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphProfile {
    Sine,
    AbsSine,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeneratorKind {
    /// Regular grid on `[0, side]^n × {0}`.
    Plane { side: f64 },
    /// `[0, length]` on the first axis.
    Segment { length: f64 },
    Circle { radius: f64 },
    /// `y = amplitude · profile(2π · frequency · x)` for `x ∈ [0, length]`,
    /// sampled uniformly in arc length. With `small_constant` set the
    /// Lipschitz constant `2π · amplitude · frequency` must stay below 1.
    LipschitzGraph {
        amplitude: f64,
        frequency: f64,
        profile: GraphProfile,
        length: f64,
        small_constant: bool,
    },
    /// Four-corner Cantor set of generation `generation` in the unit square.
    Cantor4 { generation: u32 },
    /// A plane (or segment) whose points get Gaussian normal displacements.
    PerturbedPlane { side: f64, noise: f64 },
    /// Uniform random atoms in the unit cube with equal weights.
    AtomCloud,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GeneratorKind,
    pub budget: usize,
    pub seed: u64,
    pub d: usize,
    pub n: usize,
}

impl GeneratorSpec {
    pub fn new(kind: GeneratorKind, budget: usize, d: usize, n: usize) -> Self {
        GeneratorSpec { kind, budget, seed: 0, d, n }
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.budget == 0 {
            return Err(invalid("point budget must be at least 1"));
        }
        if self.n == 0 || self.n >= self.d {
            return Err(invalid("dimensions must satisfy 0 < n < d"));
        }
        match &self.kind {
            GeneratorKind::Cantor4 { generation } => {
                if self.n != 1 || self.d != 2 {
                    return Err(invalid("Cantor4 requires n = 1 and d = 2"));
                }
                if *generation > 11 {
                    return Err(invalid("Cantor4 generation is limited to 11"));
                }
            }
            GeneratorKind::Circle { radius } => {
                if self.n != 1 || !(*radius > 0.0) {
                    return Err(invalid("Circle requires n = 1 and a positive radius"));
                }
            }
            GeneratorKind::LipschitzGraph { amplitude, frequency, length, small_constant, .. } => {
                if self.n != 1 {
                    return Err(invalid("LipschitzGraph requires n = 1"));
                }
                if !(*length > 0.0) || !(*frequency >= 0.0) || !amplitude.is_finite() {
                    return Err(invalid("LipschitzGraph needs a positive length and finite parameters"));
                }
                if *small_constant && !(2.0 * PI * amplitude.abs() * frequency < 1.0) {
                    return Err(invalid("small-constant graph needs 2π·amplitude·frequency < 1"));
                }
            }
            GeneratorKind::Plane { side } | GeneratorKind::Segment { length: side } => {
                if !(*side > 0.0) {
                    return Err(invalid("extent must be positive"));
                }
            }
            GeneratorKind::PerturbedPlane { side, noise } => {
                if !(*side > 0.0) || !(*noise >= 0.0) {
                    return Err(invalid("PerturbedPlane needs a positive side and non-negative noise"));
                }
            }
            GeneratorKind::AtomCloud => {}
        }
        if matches!(self.kind, GeneratorKind::Segment { .. }) && self.n != 1 {
            return Err(invalid("Segment requires n = 1"));
        }
        Ok(())
    }
}

pub fn generate(spec: &GeneratorSpec) -> Result<DiscreteMeasure> {
    spec.validate()?;
    let (d, n) = (spec.d, spec.n);
    let mut coords = Vec::new();
    let weights;
    match &spec.kind {
        GeneratorKind::Segment { length } => {
            let count = spec.budget.max(2);
            let h = length / (count - 1) as f64;
            for i in 0..count {
                push_embedded(&mut coords, &[i as f64 * h], d);
            }
            weights = alloc::vec![length / count as f64; count];
        }
        GeneratorKind::Plane { side } => {
            let (pts, w) = plane_grid(*side, spec.budget, n);
            for p in pts.chunks_exact(n) {
                push_embedded(&mut coords, p, d);
            }
            weights = w;
        }
        GeneratorKind::PerturbedPlane { side, noise } => {
            let (pts, w) = plane_grid(*side, spec.budget, n);
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for p in pts.chunks_exact(n) {
                let start = coords.len();
                push_embedded(&mut coords, p, d);
                for k in n..d {
                    coords[start + k] = noise * standard_normal(&mut rng);
                }
            }
            weights = w;
        }
        GeneratorKind::Circle { radius } => {
            let count = spec.budget.max(3);
            for i in 0..count {
                let theta = 2.0 * PI * i as f64 / count as f64;
                push_embedded(&mut coords, &[radius * theta.cos(), radius * theta.sin()], d);
            }
            weights = alloc::vec![2.0 * PI * radius / count as f64; count];
        }
        GeneratorKind::LipschitzGraph { amplitude, frequency, profile, length, .. } => {
            let graph = Graph { amplitude: *amplitude, frequency: *frequency, profile: *profile };
            let count = spec.budget.max(2);
            let table = ArcLengthTable::new(&graph, *length);
            let total = table.total();
            for i in 0..count {
                let s = total * i as f64 / (count - 1) as f64;
                let x = table.invert(&graph, s);
                push_embedded(&mut coords, &[x, graph.y(x)], d);
            }
            weights = alloc::vec![total / count as f64; count];
        }
        GeneratorKind::Cantor4 { generation } => {
            let k = *generation;
            let count = 4usize.pow(k);
            for i in 0..count {
                let c = cantor_center(i, k);
                coords.extend_from_slice(&c);
            }
            weights = alloc::vec![0.25f64.powi(k as i32); count];
        }
        GeneratorKind::AtomCloud => {
            let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
            for _ in 0..spec.budget {
                for _ in 0..d {
                    coords.push(rng.gen::<f64>());
                }
            }
            weights = alloc::vec![1.0 / spec.budget as f64; spec.budget];
        }
    }
    DiscreteMeasure::new(coords, weights, d, n)
}

fn push_embedded(coords: &mut Vec<f64>, p: &[f64], d: usize) {
    coords.extend_from_slice(p);
    coords.extend(core::iter::repeat(0.0).take(d - p.len()));
}

/// Regular grid with `m^n ≤ budget` points on `[0, side]^n`; equal weights
/// summing to `side^n`.
fn plane_grid(side: f64, budget: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut m = (budget as f64).powf(1.0 / n as f64).floor() as usize;
    while (m + 1).pow(n as u32) <= budget {
        m += 1;
    }
    while m > 1 && m.pow(n as u32) > budget {
        m -= 1;
    }
    let m = m.max(2);
    let h = side / (m - 1) as f64;
    let total = m.pow(n as u32);
    let mut pts = Vec::with_capacity(total * n);
    for idx in 0..total {
        let mut rest = idx;
        for _ in 0..n {
            pts.push((rest % m) as f64 * h);
            rest /= m;
        }
    }
    (pts, alloc::vec![side.powi(n as i32) / total as f64; total])
}

pub(crate) fn standard_normal<R: Rng>(rng: &mut R) -> f64 {
    // Box–Muller; u1 is kept away from zero
    let u1: f64 = 1.0 - rng.gen::<f64>();
    let u2: f64 = rng.gen::<f64>();
    (-2.0 * u1.ln()).sqrt() * (2.0 * PI * u2).cos()
}

/// Base-4 digits of `index`, most significant first, one per generation.
pub fn cantor_digits(index: usize, generation: u32) -> Vec<usize> {
    (0..generation)
        .rev()
        .map(|g| (index / 4usize.pow(g)) % 4)
        .collect()
}

/// Label of the generation-`level` square containing point `index`.
pub fn cantor_square_label(index: usize, generation: u32, level: u32) -> usize {
    index / 4usize.pow(generation - level)
}

/// Center of the generation-`generation` square with the given index.
/// Digit `q` moves to the corner `(q & 1, q >> 1)` of the parent square.
pub fn cantor_center(index: usize, generation: u32) -> [f64; 2] {
    let mut corner = [0.0, 0.0];
    let mut side = 1.0;
    for q in cantor_digits(index, generation) {
        let offset = 0.75 * side;
        corner[0] += (q & 1) as f64 * offset;
        corner[1] += (q >> 1) as f64 * offset;
        side *= 0.25;
    }
    [corner[0] + 0.5 * side, corner[1] + 0.5 * side]
}

#[derive(Debug, Clone, Copy)]
struct Graph {
    amplitude: f64,
    frequency: f64,
    profile: GraphProfile,
}

impl Graph {
    fn y(&self, x: f64) -> f64 {
        let s = (2.0 * PI * self.frequency * x).sin();
        match self.profile {
            GraphProfile::Sine => self.amplitude * s,
            GraphProfile::AbsSine => self.amplitude * s.abs(),
        }
    }

    fn dy(&self, x: f64) -> f64 {
        let w = 2.0 * PI * self.frequency;
        let c = self.amplitude * w * (w * x).cos();
        match self.profile {
            GraphProfile::Sine => c,
            GraphProfile::AbsSine => c * (w * x).sin().signum(),
        }
    }

    fn speed(&self, x: f64) -> f64 {
        let dy = self.dy(x);
        (1.0 + dy * dy).sqrt()
    }
}

/// Cumulative arc length on panels that never straddle a kink of the
/// profile, so Gauss–Legendre integrates each panel to near machine
/// precision.
struct ArcLengthTable {
    knots: Vec<f64>,
    cumulative: Vec<f64>,
    rule: GaussLegendre,
}

impl ArcLengthTable {
    fn new(graph: &Graph, length: f64) -> Self {
        let rule = GaussLegendre::new(20);
        let half_period = if graph.frequency > 0.0 { 0.5 / graph.frequency } else { length };
        let per_half = 32usize;
        let mut knots = alloc::vec![0.0];
        let mut k = 1usize;
        loop {
            let kink = k as f64 * half_period;
            let stop = kink.min(length);
            let start = *knots.last().unwrap();
            for j in 1..=per_half {
                let x = start + (stop - start) * j as f64 / per_half as f64;
                knots.push(x);
            }
            if kink >= length {
                break;
            }
            k += 1;
        }
        let mut cumulative = alloc::vec![0.0];
        for w in knots.windows(2) {
            let seg = rule.integrate(w[0], w[1], |x| graph.speed(x));
            cumulative.push(cumulative.last().unwrap() + seg);
        }
        ArcLengthTable { knots, cumulative, rule }
    }

    fn total(&self) -> f64 {
        *self.cumulative.last().unwrap()
    }

    fn invert(&self, graph: &Graph, s: f64) -> f64 {
        if s <= 0.0 {
            return 0.0;
        }
        if s >= self.total() {
            return *self.knots.last().unwrap();
        }
        let p = self.cumulative.partition_point(|&c| c <= s) - 1;
        let (a, b) = (self.knots[p], self.knots[p + 1]);
        let base = self.cumulative[p];
        let (mut lo, mut hi) = (a, b);
        let mut x = a + (b - a) * (s - base) / (self.cumulative[p + 1] - base);
        for _ in 0..100 {
            let f = base + self.rule.integrate(a, x, |t| graph.speed(t)) - s;
            if f.abs() < 1e-13 {
                break;
            }
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            let mut next = x - f / graph.speed(x);
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() < 1e-15 {
                x = next;
                break;
            }
            x = next;
        }
        x
    }
}
