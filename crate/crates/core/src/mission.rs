//! Mapping-mission schedules: a two-body orbit imaged at a fixed cadence by
//! a forward-tilted camera, filtered by the solar angle at the boresight.
//!
//! The orbit lives in an inertial frame that coincides with the Moon-fixed
//! world frame at epoch 0. Both the spacecraft and the Sun are carried into
//! the world frame by a uniform spin about its z axis.

use alloc::vec::Vec;
use core::f64::consts::TAU;

use nalgebra::{Matrix3, Rotation3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{solar_angle, surface_intersection, CameraIntrinsics, GeometryError, Pose};
use crate::od::{koe_to_state, propagate, KeplerianElements, OdError, StateVector};
use crate::MOON_RADIUS_M;

const DAY_S: f64 = 86_400.0;

#[derive(Debug, Clone, Copy, PartialEq, Error)]
pub enum MissionError {
    #[error("invalid mission configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("orbit propagation failed: {0}")]
    Propagation(#[from] OdError),
    #[error("boresight geometry failed: {0}")]
    Geometry(#[from] GeometryError),
}

/// Analytic Sun ephemeris: a circular apparent path around the Moon, seen
/// from a body spinning at a uniform sidereal rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SunModel {
    /// Longitude of the Sun along its path at epoch 0, degrees from the
    /// inertial x axis.
    pub initial_phase_deg: f64,
    /// Tilt of the Sun's path against the lunar equator, about the x axis.
    pub plane_inclination_deg: f64,
    pub solar_period_days: f64,
    /// Sidereal rotation period of the Moon.
    pub spin_period_days: f64,
}

impl Default for SunModel {
    /// The start date falls on a last-quarter Moon, so the Sun sits near
    /// selenographic longitude 270°.
    fn default() -> Self {
        Self {
            initial_phase_deg: 270.0,
            plane_inclination_deg: 1.543,
            solar_period_days: 365.25,
            spin_period_days: 27.321_661,
        }
    }
}

impl SunModel {
    /// Rotation taking inertial vectors into the world frame at `t` seconds.
    pub fn inertial_to_world(&self, t: f64) -> Rotation3<f64> {
        let spin = TAU * t / (self.spin_period_days * DAY_S);
        Rotation3::from_axis_angle(&Vector3::z_axis(), -spin)
    }

    /// Sun direction in the inertial frame.
    pub fn inertial_direction(&self, t: f64) -> Vector3<f64> {
        let lon = self.initial_phase_deg.to_radians() + TAU * t / (self.solar_period_days * DAY_S);
        let (s, c) = lon.sin_cos();
        Rotation3::from_axis_angle(&Vector3::x_axis(), self.plane_inclination_deg.to_radians())
            * Vector3::new(c, s, 0.0)
    }

    /// Unit vector from the Moon's centre toward the Sun, world frame.
    pub fn direction(&self, t: f64) -> Vector3<f64> {
        self.inertial_to_world(t) * self.inertial_direction(t)
    }

    /// Period of the Sun's apparent revolution in the world frame, seconds.
    pub fn synodic_period(&self) -> f64 {
        DAY_S / (1.0 / self.spin_period_days - 1.0 / self.solar_period_days)
    }

    pub fn is_valid(&self) -> bool {
        self.initial_phase_deg.is_finite()
            && self.plane_inclination_deg.is_finite()
            && self.solar_period_days > 0.0
            && self.spin_period_days > 0.0
            && self.solar_period_days != self.spin_period_days
    }
}

/// Sun direction at `t` under `model`.
pub fn sun_direction(model: &SunModel, t: f64) -> Vector3<f64> {
    model.direction(t)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MissionConfig {
    pub orbit: KeplerianElements,
    /// Seconds since the mission epoch of the first frame.
    pub start_epoch: f64,
    pub duration_days: f64,
    pub cadence_s: f64,
    pub off_nadir_deg: f64,
    pub sun: SunModel,
}

impl Default for MissionConfig {
    fn default() -> Self {
        Self {
            orbit: KeplerianElements {
                semi_major_axis: 1837.7,
                eccentricity: 3.8e-4,
                inclination: 90.0,
                raan: 227.0,
                arg_periapsis: 295.0,
                true_anomaly: 91.0,
            },
            start_epoch: 0.0,
            duration_days: 365.0,
            cadence_s: 1200.0,
            off_nadir_deg: 40.0,
            sun: SunModel::default(),
        }
    }
}

impl MissionConfig {
    pub fn validate(&self) -> Result<(), MissionError> {
        if !self.orbit.is_valid() {
            return Err(MissionError::InvalidConfig("orbit elements"));
        }
        if !(self.cadence_s > 0.0) || !self.cadence_s.is_finite() {
            return Err(MissionError::InvalidConfig("cadence must be positive"));
        }
        if !(self.duration_days >= 0.0) || !self.duration_days.is_finite() {
            return Err(MissionError::InvalidConfig("duration must be non-negative"));
        }
        if !(0.0..90.0).contains(&self.off_nadir_deg) {
            return Err(MissionError::InvalidConfig("off-nadir angle outside [0, 90)"));
        }
        if !self.start_epoch.is_finite() || !self.sun.is_valid() {
            return Err(MissionError::InvalidConfig("epoch or sun model"));
        }
        Ok(())
    }

    /// Number of cadence ticks in the mission.
    pub fn tick_count(&self) -> usize {
        // the small slack keeps an exact multiple from rounding down
        (self.duration_days * DAY_S / self.cadence_s * (1.0 + 1e-12)).floor() as usize
    }

    pub fn tick_time(&self, k: usize) -> f64 {
        self.start_epoch + k as f64 * self.cadence_s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MissionFrame {
    /// Seconds since the mission epoch.
    pub timestamp: f64,
    pub truth_pose: Pose,
    /// Solar angle at the boresight intersection, degrees.
    pub solar_angle: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Schedule {
    /// Cadence ticks before the solar filter.
    pub raw_frames: usize,
    pub frames: Vec<MissionFrame>,
}

/// Camera attitude with the optical axis `off_nadir_deg` from nadir, tilted
/// toward `velocity`; image rows (camera x) run cross-track.
pub fn camera_attitude(position: &Vector3<f64>, velocity: &Vector3<f64>, off_nadir_deg: f64) -> Rotation3<f64> {
    let nadir = -position.normalize();
    let along = (velocity - nadir * velocity.dot(&nadir)).normalize();
    let (s, c) = off_nadir_deg.to_radians().sin_cos();
    let z = nadir * c + along * s;
    let x = nadir.cross(&along);
    let y = z.cross(&x);
    Rotation3::from_matrix_unchecked(Matrix3::from_columns(&[x, y, z]))
}

/// Truth pose at `t` from the epoch-0 inertial state (km, km/s).
pub fn pose_at(cfg: &MissionConfig, initial: &StateVector, t: f64, mu: f64) -> Result<Pose, MissionError> {
    let sv = propagate(initial, t - initial.epoch, mu)?;
    let to_world = cfg.sun.inertial_to_world(t);
    let r = to_world * sv.position * 1000.0;
    let v = to_world * sv.velocity;
    Ok(Pose::new(camera_attitude(&r, &v, cfg.off_nadir_deg), r))
}

/// One cadence tick before filtering.
pub fn raw_frame(cfg: &MissionConfig, initial: &StateVector, t: f64, mu: f64) -> Result<MissionFrame, MissionError> {
    let pose = pose_at(cfg, initial, t, mu)?;
    // the optical axis does not depend on the intrinsics
    let cam = CameraIntrinsics {
        focal_length: 1.0,
        principal_point: [0.0, 0.0],
    };
    let hit = surface_intersection(&pose, &cam, MOON_RADIUS_M)?;
    Ok(MissionFrame {
        timestamp: t,
        truth_pose: pose,
        solar_angle: solar_angle(&hit, &cfg.sun.direction(t)),
    })
}

/// Every cadence tick of the mission, keeping frames whose boresight lands
/// on the lit side (solar angle ≤ 90°).
pub fn generate_schedule(cfg: &MissionConfig, mu: f64) -> Result<Schedule, MissionError> {
    cfg.validate()?;
    let initial = koe_to_state(&cfg.orbit, mu);
    let raw_frames = cfg.tick_count();
    let mut frames = Vec::new();
    for k in 0..raw_frames {
        let f = raw_frame(cfg, &initial, cfg.tick_time(k), mu)?;
        if f.solar_angle <= 90.0 {
            frames.push(f);
        }
    }
    Ok(Schedule { raw_frames, frames })
}

/// Retained frames per orbital revolution, counted from the mission start.
pub fn frames_per_orbit(cfg: &MissionConfig, frames: &[MissionFrame], mu: f64) -> Vec<usize> {
    let period = crate::od::orbital_period(cfg.orbit.semi_major_axis, mu);
    let span = cfg.tick_count() as f64 * cfg.cadence_s;
    let orbits = (span / period).floor() as usize;
    let mut counts = alloc::vec![0; orbits];
    for f in frames {
        let k = ((f.timestamp - cfg.start_epoch) / period).floor() as usize;
        if k < orbits {
            counts[k] += 1;
        }
    }
    counts
}
