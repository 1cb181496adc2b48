//! Scoring how representatively a satellite constellation samples storm
//! features in gridded geophysical data.
//!
//! The pipeline runs in stages:
//!
//! 1. [`scenario`]: lat/lon grid model, cell areas, seeded synthetic nature runs.
//! 2. [`detect`]: cold-cloud masks, 4-connected labeling, cluster centroids.
//! 3. [`extract`]: per-cluster maximum, area-weighted total and mean values.
//! 4. [`orbit`]: circular orbits with secular J2 nodal drift, ground tracks.
//! 5. [`observe`]: centroid-in-swath matching of clusters against ground tracks.
//! 6. [`stats`]: boundary-reflected Gaussian KDE and bounded KL divergence.
//! 7. [`evaluate`]: per-configuration scoring and ranking.
//!
//! The crate is `no_std` (it needs `alloc`). File formats and the command
//! line live in the `eosample` crate.

#![no_std]
// Negated float comparisons are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod detect;
pub mod evaluate;
pub mod extract;
mod math;
pub mod observe;
pub mod orbit;
pub mod scenario;
pub mod stats;
pub mod time;

pub use detect::{BinaryMask, LabeledGrid, StormCluster};
pub use evaluate::{ConstellationConfig, EvaluationParams, EvaluationResult};
pub use extract::ClusterAttributes;
pub use observe::ObservationOutcome;
pub use orbit::{GroundTrack, GroundTrackSample, OrbitKind, OrbitSpec};
pub use scenario::{GridAxis, NatureRunGrid, ScenarioSpec};
pub use stats::{DensityEstimate, IntegrationBounds};
pub use time::Instant;

/// Mean spherical Earth radius used for areas and surface distances, km.
pub const EARTH_RADIUS_KM: f64 = 6371.0;
