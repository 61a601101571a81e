use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::{Catalogue, CatalogueError};
use crate::geometry::{CameraIntrinsics, Pose};

/// Prior uncertainty and sensor footprint for [`visibility_subcatalogue`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityQuery {
    /// Radius of the position uncertainty ball, metres.
    pub pos_uncertainty: f64,
    /// Attitude uncertainty as a geodesic angle, degrees.
    pub att_uncertainty_deg: f64,
    /// Image width and height, pixels.
    pub image_size: [f64; 2],
    /// Craters that cannot reach this semi-minor axis anywhere in the image
    /// are dropped; 0 disables the size test.
    pub min_semi_minor: f64,
}

/// Craters that could face the camera with their centre inside the field of
/// view for some pose within the uncertainty of `prior`.
///
/// For every crater the test is conservative: the facing condition is
/// relaxed by the position radius, and each of the four frustum side planes
/// is relaxed by the attitude bound plus the angular subtense of the
/// position ball at the crater's range. With zero uncertainty the result is
/// exactly the set of facing craters whose centres project into the image.
pub fn visibility_subcatalogue(
    cat: &Catalogue,
    prior: &Pose,
    query: &VisibilityQuery,
    cam: &CameraIntrinsics,
) -> Result<Catalogue, CatalogueError> {
    let kept = visible_indices(cat, prior, query, cam);
    if kept.is_empty() {
        return Err(CatalogueError::EmptySubcatalogue);
    }
    Ok(cat.subset(&kept))
}

pub(crate) fn visible_indices(
    cat: &Catalogue,
    prior: &Pose,
    query: &VisibilityQuery,
    cam: &CameraIntrinsics,
) -> Vec<usize> {
    let t = prior.position;
    let gamma = query.pos_uncertainty.max(0.0);
    let delta = query.att_uncertainty_deg.max(0.0).to_radians();
    let range = t.norm();
    if range == 0.0 || cat.is_empty() {
        return Vec::new();
    }

    // Horizon cap: a crater at radius ρ faces some camera in the ball only if
    // t̂·û ≥ (ρ − γ)/|t|.
    let cos_cap = (cat.min_center_radius() - gamma) / range;
    let half_angle = if cos_cap <= -1.0 {
        core::f64::consts::PI
    } else {
        cos_cap.min(1.0).acos()
    };
    let candidates = cat.query_cone(&(t / range), half_angle);

    let f = cam.focal_length;
    let [cx, cy] = cam.principal_point;
    let [w, h] = query.image_size;
    let rot = prior.rotation;
    let normals = [
        Vector3::new(f, 0.0, cx),
        Vector3::new(-f, 0.0, w - cx),
        Vector3::new(0.0, f, cy),
        Vector3::new(0.0, -f, h - cy),
    ]
    .map(|n| rot * n.normalize());

    // Largest field angle inside the image, for the apparent-size bound.
    let corner_field = [[0.0, 0.0], [w, 0.0], [0.0, h], [w, h]]
        .iter()
        .map(|[x, y]| (((x - cx) / f).powi(2) + ((y - cy) / f).powi(2)).sqrt().atan())
        .fold(0.0, f64::max);

    candidates
        .into_iter()
        .filter(|&i| {
            let disc = &cat.discs()[i];
            let up = disc.up();
            let rho_c = disc.center_world.norm();
            if t.dot(&up) + gamma < rho_c {
                return false;
            }
            let to_crater = disc.center_world - t;
            let rho = to_crater.norm();
            if rho <= gamma {
                return true;
            }
            let u = to_crater / rho;
            let margin = delta + (gamma / rho).min(1.0).asin();
            if margin < core::f64::consts::FRAC_PI_2 {
                let slack = -margin.sin();
                if normals.iter().any(|n| n.dot(&u) < slack) {
                    return false;
                }
            }
            if query.min_semi_minor > 0.0 {
                let r = disc.bounding_radius();
                let kappa = if r >= rho - gamma {
                    core::f64::consts::FRAC_PI_2
                } else {
                    (r / (rho - gamma)).asin()
                };
                let beta = corner_field + delta;
                if beta + kappa < core::f64::consts::FRAC_PI_2 {
                    let max_semi = 0.5 * f * ((beta + kappa).tan() - (beta - kappa).tan());
                    if max_semi < query.min_semi_minor {
                        return false;
                    }
                }
            }
            true
        })
        .collect()
}
