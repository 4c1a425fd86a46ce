//! Dyadic "David cube" lattices on the support of a discrete measure.
//!
//! Generation j uses the scale ℓ_j = 2^{-j}·unit. The centers of generation
//! j form a first-fit ℓ_j-net scanned in index order and containing the
//! centers of generation j − 1. Points go to their nearest finest center and
//! every center of generation j + 1 attaches to its nearest center of
//! generation j, so cubes are nested. Members of a generation-j cube lie
//! within 2ℓ_j of its center.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;


use crate::error::{invalid, Result};
use crate::measure::{dist2, subset_diameter, DiscreteMeasure};

#[derive(Debug, Clone, PartialEq)]
pub struct DavidCube {
    pub id: usize,
    pub generation: u32,
    /// index of the net point at the center
    pub center: usize,
    /// ℓ(Q) = 2^{-generation}·unit
    pub side: f64,
    /// sorted point indices
    pub members: Vec<usize>,
    pub mass: f64,
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CubeLattice {
    pub unit: f64,
    pub jmax: u32,
    pub cubes: Vec<DavidCube>,
    /// cube ids of each generation, ordered by center index
    pub generations: Vec<Vec<usize>>,
    /// lookup[j][i] = id of the generation-j cube holding point i
    pub lookup: Vec<Vec<usize>>,
}

impl CubeLattice {
    pub fn root(&self) -> &DavidCube {
        &self.cubes[self.generations[0][0]]
    }

    pub fn cube(&self, id: usize) -> &DavidCube {
        &self.cubes[id]
    }

    pub fn generation(&self, j: u32) -> impl Iterator<Item = &DavidCube> + '_ {
        self.generations[j as usize].iter().map(move |&id| &self.cubes[id])
    }

    pub fn containing(&self, point: usize, j: u32) -> &DavidCube {
        &self.cubes[self.lookup[j as usize][point]]
    }

    /// Ids of `id` and its descendants down to `depth` generations below
    /// it, in breadth-first order.
    pub fn descendants(&self, id: usize, depth: u32) -> Vec<usize> {
        let top = self.cubes[id].generation;
        let mut out = alloc::vec![id];
        let mut head = 0;
        while head < out.len() {
            let c = &self.cubes[out[head]];
            if c.generation < top + depth {
                out.extend_from_slice(&c.children);
            }
            head += 1;
        }
        out
    }
}

/// B_Q: the ball of radius 10ℓ(Q) about the cube's center.
pub fn cube_ball(measure: &DiscreteMeasure, cube: &DavidCube) -> (Vec<f64>, f64) {
    (measure.point(cube.center).to_vec(), 10.0 * cube.side)
}

/// Point indices bucketed on a grid of cell size `cell`.
struct GridHash {
    cell: f64,
    d: usize,
    buckets: BTreeMap<Vec<i64>, Vec<usize>>,
}

impl GridHash {
    fn new(cell: f64, d: usize) -> Self {
        GridHash { cell, d, buckets: BTreeMap::new() }
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|v| (v / self.cell).floor() as i64).collect()
    }

    fn insert(&mut self, p: &[f64], id: usize) {
        let k = self.key(p);
        self.buckets.entry(k).or_default().push(id);
    }

    /// Calls `f` on every stored id in the 3^d block of cells around `p`.
    fn for_neighbors<F: FnMut(usize)>(&self, p: &[f64], mut f: F) {
        let base = self.key(p);
        let mut offset = alloc::vec![-1i64; self.d];
        let mut key = base.clone();
        loop {
            for k in 0..self.d {
                key[k] = base[k] + offset[k];
            }
            if let Some(ids) = self.buckets.get(&key) {
                ids.iter().for_each(|&id| f(id));
            }
            let mut k = 0;
            loop {
                if k == self.d {
                    return;
                }
                offset[k] += 1;
                if offset[k] <= 1 {
                    break;
                }
                offset[k] = -1;
                k += 1;
            }
        }
    }
}

/// Builds generations 0..=jmax with ℓ_j = 2^{-j}·unit; `unit` defaults to
/// the diameter (1 for a single point).
pub fn build_lattice(measure: &DiscreteMeasure, jmax: u32, unit: Option<f64>) -> Result<CubeLattice> {
    let unit = match unit {
        Some(u) if u > 0.0 && u.is_finite() => u,
        Some(_) => return Err(invalid("lattice unit must be positive")),
        None if measure.diameter() > 0.0 => measure.diameter(),
        None => 1.0,
    };
    if jmax > 60 || unit * (0.5f64).powi(jmax as i32) < measure.resolution() {
        return Err(invalid(alloc::format!(
            "jmax = {jmax} is too deep: 2^-jmax·unit falls below the resolution {}",
            measure.resolution()
        )));
    }
    let npts = measure.len();
    let d = measure.ambient_dim();
    let side = |j: u32| unit * (0.5f64).powi(j as i32);

    // nested nets, generation 0 forced to a single root
    let mut nets: Vec<Vec<usize>> = alloc::vec![alloc::vec![0]];
    let mut in_net = alloc::vec![false; npts];
    in_net[0] = true;
    for j in 1..=jmax {
        let l = side(j);
        let mut grid = GridHash::new(l, d);
        let mut net = nets[(j - 1) as usize].clone();
        for &c in &net {
            grid.insert(measure.point(c), c);
        }
        for i in 0..npts {
            if in_net[i] {
                continue;
            }
            let p = measure.point(i);
            let mut covered = false;
            grid.for_neighbors(p, |c| covered |= dist2(p, measure.point(c)) <= l * l);
            if !covered {
                grid.insert(p, i);
                net.push(i);
                in_net[i] = true;
            }
        }
        net.sort_unstable();
        nets.push(net);
    }

    let nearest = |p: &[f64], grid: &GridHash| {
        let mut best = (f64::INFINITY, usize::MAX);
        grid.for_neighbors(p, |c| {
            let d2 = dist2(p, measure.point(c));
            if d2 < best.0 || (d2 == best.0 && c < best.1) {
                best = (d2, c);
            }
        });
        best.1
    };

    // owner[j][i] = center index of the generation-j cube holding point i
    let mut owner: Vec<Vec<usize>> = alloc::vec![Vec::new(); jmax as usize + 1];
    let mut parent_center: Vec<BTreeMap<usize, usize>> = alloc::vec![BTreeMap::new(); jmax as usize + 1];
    {
        let mut grid = GridHash::new(side(jmax), d);
        for &c in &nets[jmax as usize] {
            grid.insert(measure.point(c), c);
        }
        owner[jmax as usize] = (0..npts).map(|i| nearest(measure.point(i), &grid)).collect();
    }
    for j in (0..jmax).rev() {
        let mut grid = GridHash::new(side(j), d);
        for &c in &nets[j as usize] {
            grid.insert(measure.point(c), c);
        }
        let map: BTreeMap<usize, usize> = nets[j as usize + 1]
            .iter()
            .map(|&c| (c, if j == 0 { 0 } else { nearest(measure.point(c), &grid) }))
            .collect();
        owner[j as usize] = owner[j as usize + 1].iter().map(|c| map[c]).collect();
        parent_center[j as usize + 1] = map;
    }

    let mut cubes: Vec<DavidCube> = Vec::new();
    let mut generations: Vec<Vec<usize>> = Vec::new();
    let mut lookup: Vec<Vec<usize>> = Vec::new();
    let mut id_of: Vec<BTreeMap<usize, usize>> = Vec::new();
    for j in 0..=jmax {
        let mut ids = BTreeMap::new();
        let mut gen_ids = Vec::new();
        for &c in &nets[j as usize] {
            let id = cubes.len();
            ids.insert(c, id);
            gen_ids.push(id);
            let parent = if j == 0 { None } else { Some(id_of[j as usize - 1][&parent_center[j as usize][&c]]) };
            cubes.push(DavidCube {
                id,
                generation: j,
                center: c,
                side: side(j),
                members: Vec::new(),
                mass: 0.0,
                parent,
                children: Vec::new(),
            });
            if let Some(p) = parent {
                cubes[p].children.push(id);
            }
        }
        let look: Vec<usize> = owner[j as usize].iter().map(|c| ids[c]).collect();
        for (i, &id) in look.iter().enumerate() {
            cubes[id].members.push(i);
        }
        lookup.push(look);
        generations.push(gen_ids);
        id_of.push(ids);
    }
    let w = measure.weights();
    for cube in &mut cubes {
        cube.mass = crate::exact_sum::exact_sum(cube.members.iter().map(|&i| w[i]));
    }
    // drop empty cubes (a net point always owns itself, so none expected)
    debug_assert!(cubes.iter().all(|c| !c.members.is_empty()));
    Ok(CubeLattice { unit, jmax, cubes, generations, lookup })
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationAudit {
    pub generation: u32,
    pub cubes: usize,
    /// extremes of (μ(Q)/μ(total))·2^{jn}
    pub min_mass_ratio: f64,
    pub max_mass_ratio: f64,
    /// extremes of diam(Q)/ℓ(Q)
    pub min_diam_ratio: f64,
    pub max_diam_ratio: f64,
    /// a mass ratio left the comparability band
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LatticeAudit {
    pub band: (f64, f64),
    pub generations: Vec<GenerationAudit>,
}

pub const DEFAULT_BAND: (f64, f64) = (1.0 / 16.0, 16.0);

pub fn lattice_audit(lattice: &CubeLattice, measure: &DiscreteMeasure, band: (f64, f64)) -> LatticeAudit {
    let n = measure.target_dim() as i32;
    let total = measure.total_mass();
    let mut out = Vec::new();
    for j in 0..=lattice.jmax {
        let scale = 2f64.powi(j as i32 * n);
        let mut a = GenerationAudit {
            generation: j,
            cubes: 0,
            min_mass_ratio: f64::INFINITY,
            max_mass_ratio: 0.0,
            min_diam_ratio: f64::INFINITY,
            max_diam_ratio: 0.0,
            flagged: false,
        };
        for q in lattice.generation(j) {
            a.cubes += 1;
            let m = q.mass / total * scale;
            a.min_mass_ratio = a.min_mass_ratio.min(m);
            a.max_mass_ratio = a.max_mass_ratio.max(m);
            let dr = subset_diameter(measure.coords(), measure.ambient_dim(), &q.members) / q.side;
            a.min_diam_ratio = a.min_diam_ratio.min(dr);
            a.max_diam_ratio = a.max_diam_ratio.max(dr);
        }
        a.flagged = a.min_mass_ratio < band.0 || a.max_mass_ratio > band.1;
        out.push(a);
    }
    LatticeAudit { band, generations: out }
}
