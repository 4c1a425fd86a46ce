//! The dual-Lipschitz distance dist_B between two atomic measures.
//!
//! The linear program
//! max Σ f(p)(σ − ν)(p) s.t. |f(p) − f(q)| ≤ |p − q|, |f(p)| ≤ dist(p, ∂B)
//! is the dual of a transport problem in which mass may also be created or
//! destroyed on ∂B at cost dist(p, ∂B). That problem is solved exactly by
//! successive shortest paths.

use alloc::vec::Vec;


use crate::error::{invalid, Error, Result};
use crate::measure::dist;

/// Largest number of atoms (both measures, inside the ball) accepted.
pub const MAX_ATOMS: usize = 2_000;

/// A finite list of atoms in R^d.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomSet {
    pub coords: Vec<f64>,
    pub masses: Vec<f64>,
    pub dim: usize,
}

impl AtomSet {
    pub fn new(dim: usize) -> Self {
        AtomSet { coords: Vec::new(), masses: Vec::new(), dim }
    }

    pub fn push(&mut self, point: &[f64], mass: f64) {
        debug_assert_eq!(point.len(), self.dim);
        self.coords.extend_from_slice(point);
        self.masses.push(mass);
    }

    pub fn len(&self) -> usize {
        self.masses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }
}

/// dist_B(σ, ν) for B = closed ball(center, radius). Atoms outside B are
/// dropped; the rest must number at most [`MAX_ATOMS`].
pub fn flat_norm_distance(sigma: &AtomSet, nu: &AtomSet, center: &[f64], radius: f64) -> Result<f64> {
    if sigma.dim != center.len() || nu.dim != center.len() {
        return Err(invalid("atom dimension does not match the ball center"));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(invalid("ball radius must be positive and finite"));
    }
    // (boundary distance, signed mass) per atom; positive ones are sources
    let mut sources: Vec<(usize, bool)> = Vec::new();
    let mut sinks: Vec<(usize, bool)> = Vec::new();
    let mut pts: Vec<&[f64]> = Vec::new();
    let mut bnd: Vec<f64> = Vec::new();
    let mut mass: Vec<f64> = Vec::new();
    let mut kept = 0usize;
    for (set, sign) in [(sigma, 1.0), (nu, -1.0)] {
        for i in 0..set.len() {
            let p = set.point(i);
            let b = radius - dist(p, center);
            if b < 0.0 || set.masses[i] == 0.0 {
                continue;
            }
            kept += 1;
            let m = sign * set.masses[i];
            if !m.is_finite() {
                return Err(invalid("atom masses must be finite"));
            }
            let id = pts.len();
            pts.push(p);
            bnd.push(b);
            mass.push(m);
            if m > 0.0 {
                sources.push((id, false));
            } else {
                sinks.push((id, false));
            }
        }
    }
    if kept > MAX_ATOMS {
        return Err(Error::Size { count: kept, cap: MAX_ATOMS });
    }
    if kept == 0 {
        return Ok(0.0);
    }
    let plus: f64 = mass.iter().filter(|m| **m > 0.0).sum();
    let minus: f64 = -mass.iter().filter(|m| **m < 0.0).sum::<f64>();
    // the boundary acts as a source for the negative part and a sink for the
    // positive part
    sources.push((usize::MAX, true));
    sinks.push((usize::MAX, true));
    let supply: Vec<f64> = sources
        .iter()
        .map(|&(id, b)| if b { minus } else { mass[id] })
        .collect();
    let demand: Vec<f64> = sinks.iter().map(|&(id, b)| if b { plus } else { -mass[id] }).collect();
    let cost = |s: (usize, bool), t: (usize, bool)| -> f64 {
        match (s.1, t.1) {
            (true, true) => 0.0,
            (true, false) => bnd[t.0],
            (false, true) => bnd[s.0],
            (false, false) => dist(pts[s.0], pts[t.0]).min(bnd[s.0] + bnd[t.0]),
        }
    };
    let costs: Vec<f64> = sources
        .iter()
        .flat_map(|&s| sinks.iter().map(move |&t| (s, t)))
        .map(|(s, t)| cost(s, t))
        .collect();
    Ok(transport_cost(&costs, supply, demand))
}

/// Exact minimum cost of a balanced transportation problem with a dense
/// cost matrix (row-major, rows = sources) by successive shortest paths with
/// Dijkstra on reduced costs.
pub fn transport_cost(costs: &[f64], mut supply: Vec<f64>, mut demand: Vec<f64>) -> f64 {
    let (a, b) = (supply.len(), demand.len());
    assert_eq!(costs.len(), a * b);
    let total: f64 = supply.iter().sum::<f64>().max(demand.iter().sum());
    if total <= 0.0 {
        return 0.0;
    }
    let eps = total * 1e-14;
    let mut flow = alloc::vec![0.0; a * b];
    // potentials: sources 0..a, sinks a..a+b
    let mut pot = alloc::vec![0.0; a + b];
    let mut dist_ = alloc::vec![f64::INFINITY; a + b];
    let mut done = alloc::vec![false; a + b];
    // predecessor of each node on the shortest path tree
    let mut pred = alloc::vec![usize::MAX; a + b];
    loop {
        if supply.iter().all(|&s| s <= eps) || demand.iter().all(|&d| d <= eps) {
            break;
        }
        dist_.iter_mut().for_each(|d| *d = f64::INFINITY);
        done.iter_mut().for_each(|d| *d = false);
        pred.iter_mut().for_each(|p| *p = usize::MAX);
        for i in 0..a {
            if supply[i] > eps {
                dist_[i] = 0.0;
            }
        }
        let mut target = usize::MAX;
        loop {
            let mut u = usize::MAX;
            let mut best = f64::INFINITY;
            for v in 0..a + b {
                if !done[v] && dist_[v] < best {
                    best = dist_[v];
                    u = v;
                }
            }
            if u == usize::MAX {
                break;
            }
            done[u] = true;
            if u >= a {
                let j = u - a;
                if demand[j] > eps {
                    target = u;
                    break;
                }
                for i in 0..a {
                    if !done[i] && flow[i * b + j] > eps {
                        let rc = -costs[i * b + j] - pot[u] + pot[i];
                        let nd = best + rc.max(0.0);
                        if nd < dist_[i] {
                            dist_[i] = nd;
                            pred[i] = u;
                        }
                    }
                }
            } else {
                for j in 0..b {
                    let v = a + j;
                    if !done[v] {
                        let rc = costs[u * b + j] - pot[u] + pot[v];
                        let nd = best + rc.max(0.0);
                        if nd < dist_[v] {
                            dist_[v] = nd;
                            pred[v] = u;
                        }
                    }
                }
            }
        }
        if target == usize::MAX {
            break;
        }
        let dt = dist_[target];
        for v in 0..a + b {
            pot[v] += dist_[v].min(dt);
        }
        // bottleneck along the path
        let mut amount = demand[target - a];
        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u >= a {
                amount = amount.min(flow[v * b + (u - a)]);
            }
            v = u;
        }
        amount = amount.min(supply[v]);
        let start = v;
        let mut v = target;
        while pred[v] != usize::MAX {
            let u = pred[v];
            if u < a {
                flow[u * b + (v - a)] += amount;
            } else {
                let f = &mut flow[v * b + (u - a)];
                *f = (*f - amount).max(0.0);
            }
            v = u;
        }
        supply[start] -= amount;
        demand[target - a] -= amount;
    }
    crate::exact_sum::exact_sum(flow.iter().zip(costs).filter(|(f, _)| **f > 0.0).map(|(f, c)| f * c))
}
