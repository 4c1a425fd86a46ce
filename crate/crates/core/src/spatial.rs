//! Immutable k-d tree over the support points of a measure.
//!
//! Every node carries the exact sum of the weights beneath it, so a closed
//! ball query adds whole subtrees that sit inside the ball and only scans
//! leaves that straddle the sphere. Because the aggregation uses
//! [`ExactSum`], the returned mass is the correctly rounded sum of the
//! individual weights and is bit-identical to a brute-force scan in any
//! order.

use alloc::vec::Vec;

#[allow(unused_imports)] // inherent when std is linked
use num_traits::Float;

use crate::exact_sum::ExactSum;

const LEAF_SIZE: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    lo: Vec<f64>,
    hi: Vec<f64>,
    start: usize,
    end: usize,
    /// child node indices, `usize::MAX` for leaves
    left: usize,
    right: usize,
    mass: ExactSum,
}

#[derive(Debug, Clone)]
pub struct SpatialIndex {
    dim: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    /// point indices in tree order
    order: Vec<usize>,
    nodes: Vec<Node>,
}

impl SpatialIndex {
    /// Builds the tree from flat coordinates (`dim` values per point).
    pub fn build(coords: &[f64], weights: &[f64], dim: usize) -> Self {
        assert!(dim > 0 && coords.len() == weights.len() * dim);
        let n = weights.len();
        let mut index = SpatialIndex {
            dim,
            coords: coords.to_vec(),
            weights: weights.to_vec(),
            order: (0..n).collect(),
            nodes: Vec::new(),
        };
        if n > 0 {
            index.build_node(0, n);
        }
        index
    }

    fn point(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    fn build_node(&mut self, start: usize, end: usize) -> usize {
        let dim = self.dim;
        let mut lo = alloc::vec![f64::INFINITY; dim];
        let mut hi = alloc::vec![f64::NEG_INFINITY; dim];
        let mut mass = ExactSum::new();
        for &i in &self.order[start..end] {
            for k in 0..dim {
                let c = self.coords[i * dim + k];
                lo[k] = lo[k].min(c);
                hi[k] = hi[k].max(c);
            }
            mass.add(self.weights[i]);
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, start, end, left: usize::MAX, right: usize::MAX, mass });
        if end - start <= LEAF_SIZE {
            return id;
        }
        let node = &self.nodes[id];
        let (axis, _) = (0..dim)
            .map(|k| (k, node.hi[k] - node.lo[k]))
            .fold((0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
        if self.nodes[id].hi[axis] <= self.nodes[id].lo[axis] {
            // all points coincide
            return id;
        }
        let mid = start + (end - start) / 2;
        let coords = &self.coords;
        self.order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
            coords[a * dim + axis]
                .total_cmp(&coords[b * dim + axis])
                .then(a.cmp(&b))
        });
        let left = self.build_node(start, mid);
        let right = self.build_node(mid, end);
        self.nodes[id].left = left;
        self.nodes[id].right = right;
        id
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn box_dist2(&self, node: &Node, center: &[f64]) -> (f64, f64) {
        let mut near = 0.0;
        let mut far = 0.0;
        for k in 0..self.dim {
            let c = center[k];
            let (l, h) = (node.lo[k], node.hi[k]);
            let dn = if c < l { l - c } else if c > h { c - h } else { 0.0 };
            let df = (c - l).abs().max((h - c).abs());
            near += dn * dn;
            far += df * df;
        }
        (near, far)
    }

    fn dist2(&self, i: usize, center: &[f64]) -> f64 {
        self.point(i)
            .iter()
            .zip(center)
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }

    /// Exact (correctly rounded) sum of the weights in the closed ball.
    pub fn ball_mass(&self, center: &[f64], radius: f64) -> f64 {
        self.ball_mass_exact(center, radius).value()
    }

    pub fn ball_mass_exact(&self, center: &[f64], radius: f64) -> ExactSum {
        let mut acc = ExactSum::new();
        if self.nodes.is_empty() || radius < 0.0 {
            return acc;
        }
        let r2 = radius * radius;
        let mut stack = alloc::vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let (near, far) = self.box_dist2(node, center);
            if near > r2 {
                continue;
            }
            if far <= r2 {
                acc.merge(&node.mass);
                continue;
            }
            if node.left == usize::MAX {
                for &i in &self.order[node.start..node.end] {
                    if self.dist2(i, center) <= r2 {
                        acc.add(self.weights[i]);
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
        acc
    }

    pub fn count_in_ball(&self, center: &[f64], radius: f64) -> usize {
        let mut count = 0;
        self.visit_ball(center, radius, |_, _| count += 1);
        count
    }

    /// Calls `f(index, squared distance)` for every point in the closed ball,
    /// in tree order. The order is fixed for a given index, so reductions
    /// done inside `f` are reproducible.
    pub fn visit_ball<F: FnMut(usize, f64)>(&self, center: &[f64], radius: f64, mut f: F) {
        if self.nodes.is_empty() || radius < 0.0 {
            return;
        }
        let r2 = radius * radius;
        let mut stack = alloc::vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let (near, far) = self.box_dist2(node, center);
            if near > r2 {
                continue;
            }
            if node.left == usize::MAX || far <= r2 {
                for &i in &self.order[node.start..node.end] {
                    let d2 = self.dist2(i, center);
                    if d2 <= r2 {
                        f(i, d2);
                    }
                }
            } else {
                stack.push(node.right);
                stack.push(node.left);
            }
        }
    }

    /// Indices of points in the closed ball, ascending.
    pub fn indices_in_ball(&self, center: &[f64], radius: f64) -> Vec<usize> {
        let mut out = Vec::new();
        self.visit_ball(center, radius, |i, _| out.push(i));
        out.sort_unstable();
        out
    }

    /// Distance to the k-th nearest point (k ≥ 1, counting a point located
    /// at `center` itself). Returns `None` when fewer than k points exist.
    pub fn knn_distance(&self, center: &[f64], k: usize) -> Option<f64> {
        self.knn_filtered(center, k, |_| true)
    }

    /// Nearest point other than `skip`, as (index, distance).
    pub fn nearest_excluding(&self, center: &[f64], skip: usize) -> Option<(usize, f64)> {
        let mut best = (usize::MAX, f64::INFINITY);
        self.nearest_rec(0, center, &mut best, &|i| i != skip);
        (best.0 != usize::MAX).then(|| (best.0, best.1.sqrt()))
    }

    fn nearest_rec(&self, id: usize, center: &[f64], best: &mut (usize, f64), keep: &dyn Fn(usize) -> bool) {
        if self.nodes.is_empty() {
            return;
        }
        let node = &self.nodes[id];
        if self.box_dist2(node, center).0 > best.1 {
            return;
        }
        if node.left == usize::MAX {
            for &i in &self.order[node.start..node.end] {
                if !keep(i) {
                    continue;
                }
                let d2 = self.dist2(i, center);
                if d2 < best.1 || (d2 == best.1 && i < best.0) {
                    *best = (i, d2);
                }
            }
            return;
        }
        let dl = self.box_dist2(&self.nodes[node.left], center).0;
        let dr = self.box_dist2(&self.nodes[node.right], center).0;
        let (a, b) = if dl <= dr { (node.left, node.right) } else { (node.right, node.left) };
        self.nearest_rec(a, center, best, keep);
        self.nearest_rec(b, center, best, keep);
    }

    fn knn_filtered(&self, center: &[f64], k: usize, keep: impl Fn(usize) -> bool) -> Option<f64> {
        if k == 0 || k > self.len() {
            return None;
        }
        // bounded max-heap kept as a sorted vector; k is small in practice
        let mut best: Vec<f64> = Vec::with_capacity(k + 1);
        let mut stack = alloc::vec![0usize];
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            let bound = if best.len() == k { best[k - 1] } else { f64::INFINITY };
            if self.box_dist2(node, center).0 > bound {
                continue;
            }
            if node.left == usize::MAX {
                for &i in &self.order[node.start..node.end] {
                    if !keep(i) {
                        continue;
                    }
                    let d2 = self.dist2(i, center);
                    if best.len() < k || d2 < best[k - 1] {
                        let pos = best.partition_point(|&x| x <= d2);
                        best.insert(pos, d2);
                        best.truncate(k);
                    }
                }
            } else {
                let dl = self.box_dist2(&self.nodes[node.left], center).0;
                let dr = self.box_dist2(&self.nodes[node.right], center).0;
                if dl <= dr {
                    stack.push(node.right);
                    stack.push(node.left);
                } else {
                    stack.push(node.left);
                    stack.push(node.right);
                }
            }
        }
        (best.len() == k).then(|| best[k - 1].sqrt())
    }
}
