//! Center subsampling for multiscale fields.

use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::measure::DiscreteMeasure;

/// Default number of centers above which fields are computed on a sample.
pub const DEFAULT_CENTER_BUDGET: usize = 5_000;

/// A set of center indices with the measure weight each one stands for.
#[derive(Debug, Clone, PartialEq)]
pub struct CenterSample {
    pub indices: Vec<usize>,
    /// inclusion probability of each sampled index
    pub inclusion: Vec<f64>,
    /// w_i / π_i, the Horvitz–Thompson weight of each sampled index
    pub weights: Vec<f64>,
}

impl CenterSample {
    /// Every point, with its own weight.
    pub fn all(measure: &DiscreteMeasure) -> Self {
        Self::from_indices(measure, (0..measure.len()).collect())
    }

    /// An explicit list of centers with inclusion probability 1.
    pub fn from_indices(measure: &DiscreteMeasure, indices: Vec<usize>) -> Self {
        let weights = indices.iter().map(|&i| measure.weight(i)).collect();
        let inclusion = alloc::vec![1.0; indices.len()];
        CenterSample { indices, inclusion, weights }
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }
}

/// All points when there are at most `budget`, otherwise a systematic
/// probability-proportional-to-mass sample of about `budget` points taken in
/// index order from a seeded random start. Points heavy enough to be hit
/// with certainty are included with probability one.
pub fn sample_centers(measure: &DiscreteMeasure, budget: usize, seed: u64) -> CenterSample {
    let n = measure.len();
    if n <= budget || budget == 0 {
        return CenterSample::all(measure);
    }
    let w = measure.weights();
    let mut certain = alloc::vec![false; n];
    // peel off certainty units until every remaining π_i < 1
    let (mut slots, mut rest) = (budget as f64, measure.total_mass());
    loop {
        let mut changed = false;
        for i in 0..n {
            if !certain[i] && slots * w[i] >= rest {
                certain[i] = true;
                slots -= 1.0;
                rest -= w[i];
                changed = true;
            }
        }
        if !changed || slots <= 0.0 {
            break;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let step = if slots > 0.0 { rest / slots } else { f64::INFINITY };
    let mut next = rng.gen::<f64>() * step;
    let mut cumulative = 0.0;
    let mut sample = CenterSample { indices: Vec::new(), inclusion: Vec::new(), weights: Vec::new() };
    for i in 0..n {
        if certain[i] {
            sample.indices.push(i);
            sample.inclusion.push(1.0);
            sample.weights.push(w[i]);
            continue;
        }
        let upper = cumulative + w[i];
        if next < upper {
            let pi = w[i] / step;
            sample.indices.push(i);
            sample.inclusion.push(pi);
            sample.weights.push(w[i] / pi);
            next += step;
        }
        cumulative = upper;
    }
    sample
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::{generate, GeneratorKind, GeneratorSpec};

    #[test]
    fn small_measures_are_not_sampled() {
        let m = generate(&GeneratorSpec::new(GeneratorKind::Segment { length: 1.0 }, 100, 2, 1)).unwrap();
        let s = sample_centers(&m, 5000, 1);
        assert_eq!(s.len(), 100);
        assert!(s.inclusion.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn sample_is_unbiased_for_mass_and_seeded() {
        let m = generate(&GeneratorSpec::new(GeneratorKind::Cantor4 { generation: 6 }, 1, 2, 1)).unwrap();
        let s = sample_centers(&m, 500, 3);
        assert!((s.len() as i64 - 500).abs() <= 1);
        let est: f64 = s.weights.iter().sum();
        assert!((est - m.total_mass()).abs() < 1e-9);
        assert_eq!(s, sample_centers(&m, 500, 3));
        assert_ne!(s.indices, sample_centers(&m, 500, 4).indices);
    }

    #[test]
    fn heavy_points_are_certain() {
        let mut w = alloc::vec![1.0; 50];
        w[10] = 1000.0;
        let coords = (0..50).flat_map(|i| [i as f64, 0.0]).collect();
        let m = DiscreteMeasure::new(coords, w, 2, 1).unwrap();
        let s = sample_centers(&m, 10, 0);
        let pos = s.indices.iter().position(|&i| i == 10).unwrap();
        assert_eq!(s.inclusion[pos], 1.0);
        let est: f64 = s.weights.iter().sum();
        assert!((est - m.total_mass()).abs() < 1e-9);
    }
}
