//! Finite windows of Delone point sets and the combinatorial geometry on them.
//!
//! The crate works with a finite rectangular window of an (in principle
//! infinite) point set. Everything downstream — patches, locater sets, copy
//! counts, lower densities, Voronoi distortions, repetitivity constants and
//! subadditive cube limits — is computed only from data that the window fully
//! determines, so window boundaries never contaminate the reported values.
//!
//! Entry points:
//! - [`generators`] builds reference samples (lattices, Fibonacci and
//!   Sturmian chains, products, perturbed lattices),
//! - [`PointSample`] carries the window, the points and a uniform-grid index,
//! - [`patterns`], [`densities`], [`voronoi`], [`properties`] and [`ergodic`]
//!   hold the analysis operations,
//! - [`analysis`] bundles them into a deterministic batch report,
//! - [`io`] reads and writes the DELONE v1 text format.

pub mod analysis;
pub mod densities;
pub mod ergodic;
mod error;
pub mod generators;
pub mod geom;
mod grid;
pub mod io;
pub mod patterns;
pub mod properties;
pub mod sample;
pub mod voronoi;

pub use error::{Error, Result};
pub use geom::{BoxRegion, Point};
pub use sample::{PeriodReport, PointSample};

/// Duplicate-point merge tolerance, in window units. Points closer than this
/// are treated as one; the generators are exact to roughly 1e-12, so this
/// guards against round-off without merging true neighbors.
pub const MERGE_TOL: f64 = 1e-9;

/// Default tolerance for closed-ball boundary membership: a point within
/// this distance of the ball boundary counts as inside.
pub const DEFAULT_BOUNDARY_TOL: f64 = 1e-9;

/// Patch-equality tolerance as a fraction of the packing radius.
pub const PATCH_TOL_FACTOR: f64 = 1e-6;
