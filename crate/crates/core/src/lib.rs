//! Rank-order quality assessment for dimensionality reduction.
//!
//! The crate is organised around a single data representation, the
//! [`Configuration`] (an `n x m` coordinate matrix), and the neighbor rank
//! structures derived from it:
//!
//! - [`geometry`]: configurations, proximity matrices and per-item neighbor ranks.
//! - [`agreement`]: k-neighborhood agreement rates, the area statistic `psi`,
//!   co-ranking matrices and intrusion/extrusion tallies.
//! - [`dimred`]: PCA, classical and SMACOF MDS, LLE, Isomap and Laplacian eigenmaps.
//! - [`manifolds`]: the benchmark spheres, Swiss roll and tori.
//! - [`viz`]: deterministic SVG scatter plots, heatmaps, loess overlays and lift plots.

pub mod agreement;
pub mod dimred;
mod error;
pub mod geometry;
mod linalg;
pub mod manifolds;
pub mod viz;

pub use agreement::{AgreementProfile, CoRankingMatrix, KRange, RankMovementTally, WeightFunction};
pub use error::{Error, Result};
pub use geometry::{Configuration, MetricTag, ProximityKind, ProximityMatrix, RankStructure, TiePolicy};
