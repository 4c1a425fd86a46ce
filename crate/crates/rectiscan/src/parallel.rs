//! Rayon drivers over field cells, cubes and wavelet coefficients. Work is
//! split into independent items and collected in input order, so results do
//! not depend on the thread count.

use rayon::prelude::*;

use rectiscan_core::geometry::{cube_alpha, packing_from_alphas, AlphaConfig, PackingAudit};
use rectiscan_core::lattice::CubeLattice;
use rectiscan_core::sampling::CenterSample;
use rectiscan_core::square::{validate_field_inputs, CoefficientField, Functional, ScaleGrid};
use rectiscan_core::wavelet::{candidate_cubes, h_coefficient, DecayFit, DyadicCube, WaveletCoeff, WaveletFamily};
use rectiscan_core::{DiscreteMeasure, Result, SpatialIndex};

use crate::error::{CliError, CliResult};

pub const THREADS_ENV: &str = "RECTISCAN_THREADS";

/// Thread count from the flag, else from `RECTISCAN_THREADS`, else rayon's
/// default.
pub fn thread_pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let threads = match threads {
        Some(t) => Some(t),
        None => match std::env::var(THREADS_ENV) {
            Ok(s) => Some(s.trim().parse::<usize>().map_err(|_| {
                CliError::Config(format!("{THREADS_ENV} must be a positive integer, got `{s}`"))
            })?),
            Err(_) => None,
        },
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        if t == 0 {
            return Err(CliError::Config("thread count must be at least 1".into()));
        }
        builder = builder.num_threads(t);
    }
    builder.build().map_err(|e| CliError::Config(format!("thread pool: {e}")))
}

/// Parallel version of `square::coefficient_field`; identical output.
pub fn coefficient_field(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    functional: Functional,
    centers: CenterSample,
    grid: ScaleGrid,
) -> Result<CoefficientField> {
    validate_field_inputs(measure, &centers, &grid)?;
    let m = grid.scales.len();
    let results: Vec<Result<f64>> = (0..centers.len() * m)
        .into_par_iter()
        .map(|cell| functional.evaluate(measure, index, centers.indices[cell / m], grid.scales[cell % m]))
        .collect();
    Ok(CoefficientField::assemble(measure, functional, centers, grid, results))
}

/// Parallel version of `geometry::alpha_packing_audit`.
pub fn alpha_packing_audit(
    measure: &DiscreteMeasure,
    index: &SpatialIndex,
    lattice: &CubeLattice,
    root: usize,
    depth: u32,
    cfg: &AlphaConfig,
) -> Result<PackingAudit> {
    let depth = depth.min(lattice.jmax - lattice.cube(root).generation);
    let ids = lattice.descendants(root, depth);
    let alphas = ids
        .par_iter()
        .map(|&id| cube_alpha(measure, index, lattice, id, cfg).map(|a| (id, a.value)))
        .collect::<Result<Vec<_>>>()?;
    Ok(packing_from_alphas(lattice, root, depth, alphas))
}

pub fn h_coefficients(family: &WaveletFamily, cubes: &[DyadicCube]) -> Result<Vec<WaveletCoeff>> {
    cubes.par_iter().map(|c| h_coefficient(family, c)).collect()
}

/// Parallel version of `wavelet::decay_regression` with the same fit; also
/// returns every coefficient it computed.
pub fn decay_regression(
    family: &WaveletFamily,
    n: usize,
    levels: &[i32],
    expected: f64,
) -> Result<(DecayFit, Vec<WaveletCoeff>)> {
    let mut sides = Vec::new();
    let mut maxima = Vec::new();
    let mut all = Vec::new();
    for &level in levels {
        let coeffs = h_coefficients(family, &candidate_cubes(n, level, 400, 16))?;
        sides.push(2f64.powi(-level));
        maxima.push(coeffs.iter().fold(0.0f64, |m, c| m.max(c.value.abs())));
        all.extend(coeffs);
    }
    let xs: Vec<f64> = sides.iter().map(|s| s.log2()).collect();
    let ys: Vec<f64> = maxima.iter().map(|m| m.max(f64::MIN_POSITIVE).log2()).collect();
    let slope = rectiscan_core::square::linear_fit(&xs, &ys).slope;
    Ok((DecayFit { sides, maxima, slope, expected }, all))
}
