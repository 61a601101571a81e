use alloc::vec::Vec;

use nalgebra::{Rotation3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use super::{ellipse_residual_vector, CidError};
use crate::geometry::{project_crater, CameraIntrinsics, CraterDisc, EllipseParams, Pose};
use crate::lsq::{minimize, LmOptions};

/// Camera position that reprojects crater `c` onto detection `d` with the
/// attitude held fixed.
///
/// Starts on the back-projected ray through the detected centre at the range
/// implied by the apparent size, `f·r/â`, and runs damped Gauss-Newton on
/// the 5-vector ellipse residual.
pub fn p1e_position(
    d: &EllipseParams,
    c: &CraterDisc,
    attitude: &Rotation3<f64>,
    cam: &CameraIntrinsics,
    eps: f64,
) -> Result<Vector3<f64>, CidError> {
    if !d.is_valid() {
        return Err(CidError::NoConvergence);
    }
    let ray = attitude * cam.ray(d.x, d.y);
    let range = cam.focal_length * c.bounding_radius() / d.semi_major;
    let t0 = c.center_world - ray * range;

    let residual = |t: &Vector3<f64>, r: &mut Vec<f64>| -> bool {
        r.clear();
        match project_crater(c, &Pose::new(*attitude, *t), cam) {
            Ok(e) => {
                r.extend_from_slice(&ellipse_residual_vector(d, &e));
                true
            }
            Err(_) => false,
        }
    };
    let opts = LmOptions {
        max_iters: 100,
        rel_tol: 1e-8,
        abs_tol: 1e-20,
        fd_step: Vector3::repeat(1e-6 * range),
        lambda0: 1e-3,
    };
    let out = minimize(t0, residual, |_| {}, &opts).ok_or(CidError::NoConvergence)?;
    if out.cost.sqrt() <= eps && out.x.iter().all(|v| v.is_finite()) {
        Ok(out.x)
    } else {
        Err(CidError::NoConvergence)
    }
}
