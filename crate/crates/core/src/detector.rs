//! Parameterised crater-detection simulator.
//!
//! Ground-truth rims are projected at the true pose, filtered by apparent
//! size and image bounds, dropped with an illumination-dependent miss rate,
//! perturbed in ellipse-parameter space and mixed with clutter.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Beta, Distribution, Normal, Poisson};
use serde::{Deserialize, Serialize};

use crate::catalogue::{Catalogue, VisibilityQuery};
use crate::geometry::{project_crater, solar_angle, CameraIntrinsics, EllipseParams, Pose};

/// Ground-truth label of a spurious detection.
pub const CLUTTER_ID: &str = "CLUTTER";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detection {
    pub ellipse: EllipseParams,
    pub confidence: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct NoiseConfig {
    /// Standard deviation of the centre, pixels.
    pub center_sigma: f64,
    /// Standard deviation of each semi-axis as a fraction of its length.
    pub axis_sigma_frac: f64,
    /// Standard deviation of the orientation, radians.
    pub angle_sigma: f64,
    /// Nominal probability of missing a crater at low solar angles.
    pub miss_rate: f64,
    /// Expected number of spurious detections per frame.
    pub clutter_rate: f64,
    pub confidence_threshold: f64,
    /// Smallest reported semi-minor axis, pixels.
    pub min_semi_minor: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            center_sigma: 1.0,
            axis_sigma_frac: 0.03,
            angle_sigma: 0.02,
            miss_rate: 0.3,
            clutter_rate: 8.0,
            confidence_threshold: 0.5,
            min_semi_minor: 4.0,
            seed: 0,
        }
    }
}

impl NoiseConfig {
    /// Perfect detector: no noise, misses or clutter.
    pub fn noiseless() -> Self {
        Self {
            center_sigma: 0.0,
            axis_sigma_frac: 0.0,
            angle_sigma: 0.0,
            miss_rate: 0.0,
            clutter_rate: 0.0,
            ..Self::default()
        }
    }

    /// Same profile with the seed derived for one frame.
    pub fn for_frame(&self, frame_index: u64) -> Self {
        Self {
            seed: self.seed ^ frame_index,
            ..*self
        }
    }

    pub fn is_valid(&self) -> bool {
        let nonneg = |v: f64| v >= 0.0 && v.is_finite();
        nonneg(self.center_sigma)
            && nonneg(self.axis_sigma_frac)
            && nonneg(self.angle_sigma)
            && (0.0..=1.0).contains(&self.miss_rate)
            && nonneg(self.clutter_rate)
            && (0.0..=1.0).contains(&self.confidence_threshold)
            && nonneg(self.min_semi_minor)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FrameDetections {
    pub timestamp: f64,
    pub detections: Vec<Detection>,
    /// Catalogue id or [`CLUTTER_ID`] per detection, when known.
    pub ground_truth_ids: Option<Vec<String>>,
}

impl FrameDetections {
    pub fn len(&self) -> usize {
        self.detections.len()
    }

    pub fn is_empty(&self) -> bool {
        self.detections.is_empty()
    }

    pub fn ellipses(&self) -> impl Iterator<Item = &EllipseParams> {
        self.detections.iter().map(|d| &d.ellipse)
    }
}

/// True iff `b̂ ≥ min_semi_minor` and the bounding box lies inside the image.
pub fn apparent_size_filter(ellipse: &EllipseParams, min_semi_minor: f64, image_size: [f64; 2]) -> bool {
    let (hx, hy) = ellipse.half_extents();
    ellipse.semi_minor >= min_semi_minor
        && ellipse.x - hx >= 0.0
        && ellipse.y - hy >= 0.0
        && ellipse.x + hx <= image_size[0]
        && ellipse.y + hy <= image_size[1]
}

/// Probability of missing a crater lit at `solar_angle_deg`.
///
/// The nominal rate holds up to 60° and ramps linearly to three times
/// nominal at 90°, capped at 0.95 (or the nominal rate, if higher).
pub fn miss_probability(miss_rate: f64, solar_angle_deg: f64) -> f64 {
    if miss_rate >= 1.0 {
        return 1.0;
    }
    let ramp = 1.0 + 2.0 * ((solar_angle_deg - 60.0) / 30.0).clamp(0.0, 1.0);
    (miss_rate * ramp).min(miss_rate.max(0.95))
}

/// Indices of catalogue craters the detector would report at `pose` before
/// misses, in catalogue order, with their exact image ellipses.
pub fn visible_craters(
    pose: &Pose,
    cat: &Catalogue,
    cam: &CameraIntrinsics,
    min_semi_minor: f64,
    image_size: [f64; 2],
) -> Vec<(usize, EllipseParams)> {
    let query = VisibilityQuery {
        pos_uncertainty: 0.0,
        att_uncertainty_deg: 0.0,
        image_size,
        min_semi_minor,
    };
    crate::catalogue::visible_indices(cat, pose, &query, cam)
        .into_iter()
        .filter_map(|i| {
            let e = project_crater(&cat.discs()[i], pose, cam).ok()?;
            apparent_size_filter(&e, min_semi_minor, image_size).then_some((i, e))
        })
        .collect()
}

/// Simulate one frame of detections.
pub fn simulate_detections(
    truth_pose: &Pose,
    cat: &Catalogue,
    cam: &CameraIntrinsics,
    noise: &NoiseConfig,
    image_size: [f64; 2],
    sun_direction: &Vector3<f64>,
) -> FrameDetections {
    let mut rng = ChaCha8Rng::seed_from_u64(noise.seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let inlier_conf = Beta::new(8.0, 2.0).expect("beta parameters");
    let clutter_conf = Beta::new(2.0, 3.0).expect("beta parameters");
    let c_min = noise.confidence_threshold;

    let mut out: Vec<(Detection, String)> = Vec::new();
    for (i, exact) in visible_craters(truth_pose, cat, cam, noise.min_semi_minor, image_size) {
        let phi = solar_angle(&cat.discs()[i].center_world, sun_direction);
        let miss: f64 = rng.random();
        let draws: [f64; 5] = core::array::from_fn(|_| unit.sample(&mut rng));
        let conf: f64 = inlier_conf.sample(&mut rng);
        if miss < miss_probability(noise.miss_rate, phi) {
            continue;
        }
        let a = exact.semi_major * (1.0 + noise.axis_sigma_frac * draws[2]);
        let b = exact.semi_minor * (1.0 + noise.axis_sigma_frac * draws[3]);
        let ellipse = EllipseParams::new(
            exact.x + noise.center_sigma * draws[0],
            exact.y + noise.center_sigma * draws[1],
            a.abs().max(1e-3),
            b.abs().max(1e-3),
            exact.theta + noise.angle_sigma * draws[4],
        )
        .canonical();
        let detection = Detection {
            ellipse,
            confidence: c_min + (1.0 - c_min) * conf,
        };
        out.push((detection, cat.entries()[i].id.clone()));
    }

    if noise.clutter_rate > 0.0 {
        let n = Poisson::new(noise.clutter_rate)
            .map(|p| p.sample(&mut rng) as usize)
            .unwrap_or(0);
        let lo = noise.min_semi_minor.max(1.0);
        let hi = (0.25 * image_size[0]).max(lo);
        for _ in 0..n {
            let a = (lo.ln() + rng.random::<f64>() * (hi.ln() - lo.ln())).exp();
            let ratio = rng.random_range(0.5..=1.0);
            let ellipse = EllipseParams::new(
                rng.random::<f64>() * image_size[0],
                rng.random::<f64>() * image_size[1],
                a,
                a * ratio,
                rng.random::<f64>() * core::f64::consts::PI,
            )
            .canonical();
            let confidence: f64 = clutter_conf.sample(&mut rng);
            if confidence >= c_min {
                out.push((
                    Detection {
                        ellipse,
                        confidence,
                    },
                    CLUTTER_ID.to_string(),
                ));
            }
        }
    }
    out.shuffle(&mut rng);
    let (detections, ids) = out.into_iter().unzip();
    FrameDetections {
        timestamp: 0.0,
        detections,
        ground_truth_ids: Some(ids),
    }
}
