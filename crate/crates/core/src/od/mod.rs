//! Orbit determination: two-body propagation, Gibbs initialisation and a
//! batch fit of an orbit to per-frame position estimates.
//!
//! Orbital quantities are in km, km/s and seconds; [`TimedPosition`] carries
//! metres to match the rest of the pipeline.

mod elements;
mod fit;
mod gibbs;
mod kepler;

pub use elements::{koe_to_state, state_to_koe, KeplerianElements, StateVector};
pub use fit::{fit_orbit, propagate_to_timestamps, OrbitFit};
pub use gibbs::gibbs_velocity;
pub use kepler::{orbital_period, propagate};

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum OdError {
    #[error("state is not a non-degenerate ellipse")]
    Degenerate,
    #[error("Kepler's equation did not converge")]
    KeplerNoConvergence,
    #[error("positions are not coplanar")]
    NotCoplanar,
    #[error("positions are too close together")]
    TooClose,
    #[error("no usable observation triple for Gibbs initialisation")]
    InitializationFailed,
    #[error("orbit fit did not converge")]
    NoConvergence,
}

/// A position estimate at a time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimedPosition {
    /// Seconds.
    pub timestamp: f64,
    /// Metres.
    pub position: Vector3<f64>,
}

impl TimedPosition {
    pub fn new(timestamp: f64, position: Vector3<f64>) -> Self {
        Self {
            timestamp,
            position,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.timestamp.is_finite() && self.position.iter().all(|v| v.is_finite())
    }
}
