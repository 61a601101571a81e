//! Crater-based navigation for lunar orbiters.
//!
//! The crate estimates a spacecraft's 6DoF pose from imaged crater rims
//! matched against a catalogue of 3D crater discs, and refines batches of
//! position estimates by fitting a single two-body orbit through them.
//!
//! Everything here is pure computation over immutable values: it builds
//! without `std` (only `alloc`), so file formats, wall-clock timing and the
//! command-line front end live in the companion `crater-nav` crate.
//!
//! Module map:
//!
//! - [`geometry`]: camera model, crater-disc homography, conic projection,
//!   conic/ellipse conversion, surface intersection and angle metrics.
//! - [`catalogue`]: crater catalogue, lat/lon grid index, rim-height
//!   adjustment and per-frame visibility sub-catalogues.
//! - [`detector`]: parameterised crater-detection simulator.
//! - [`cid`]: descriptor-less crater identification by position search.
//! - [`cbpe`]: Perspective-n-Crater pose refinement with Tukey IRLS.
//! - [`od`]: Keplerian elements, two-body propagation, Gibbs velocity and
//!   least-squares orbit fitting.
//! - [`mission`]: orbit schedule generation and the simplified Sun model.
//! - [`pipeline`]: per-frame orchestration, prior initialisation, orbit
//!   refinement of a batch and summary statistics.

#![no_std]
// Float methods come from `num_traits::Float`. Once anything in the build
// links std they are also inherent, so those imports carry an allow.

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod catalogue;
pub mod cbpe;
pub mod cid;
pub mod detector;
pub mod geometry;
mod lsq;
mod math;
pub mod mission;
pub mod od;
pub mod pipeline;

/// Mean lunar radius of the spherical Moon model, metres.
pub const MOON_RADIUS_M: f64 = 1_737_400.0;

/// Lunar gravitational parameter, km³/s².
pub const MU_MOON_KM3_S2: f64 = 4_902.800_066;
