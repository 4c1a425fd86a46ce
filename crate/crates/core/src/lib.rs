//! Multiscale analysis of discrete approximations to n-dimensional
//! AD-regular measures in R^d.
//!
//! The crate is `no_std` (it needs `alloc`). IO, file formats, parallel
//! drivers and the command line live in the `rectiscan` crate.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod datasets;
pub mod error;
pub mod exact_sum;
pub mod geometry;
pub mod kernels;
pub mod lattice;
pub mod linalg;
pub mod measure;
pub mod quadrature;
pub mod sampling;
pub mod spatial;
pub mod square;
pub mod transport;
pub mod uniformity;
pub mod wavelet;

pub use error::{Error, Result};
pub use measure::{AdProfile, DiscreteMeasure};
pub use spatial::SpatialIndex;
