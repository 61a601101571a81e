use nalgebra::{Rotation3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use super::{rotation_angle, CameraIntrinsics, GeometryError, Pose};

/// First intersection of the optical axis with a sphere centred on the origin.
///
/// The intrinsics are accepted for symmetry with the projection functions;
/// the optical axis does not depend on them.
pub fn surface_intersection(
    pose: &Pose,
    _cam: &CameraIntrinsics,
    moon_radius: f64,
) -> Result<Vector3<f64>, GeometryError> {
    ray_sphere(&pose.position, &pose.boresight(), moon_radius)
}

/// Nearest non-negative intersection of `origin + s·dir` with the sphere.
pub(crate) fn ray_sphere(
    origin: &Vector3<f64>,
    dir: &Vector3<f64>,
    radius: f64,
) -> Result<Vector3<f64>, GeometryError> {
    let d = dir.normalize();
    let b = origin.dot(&d);
    let c = origin.norm_squared() - radius * radius;
    let disc = b * b - c;
    if !(disc > 0.0) {
        return Err(GeometryError::NoIntersection);
    }
    let sq = disc.sqrt();
    // Stable roots of s² + 2bs + c = 0.
    let q = -b - b.signum() * sq;
    let (mut s0, mut s1) = if q != 0.0 { (q, c / q) } else { (-sq, sq) };
    if s0 > s1 {
        core::mem::swap(&mut s0, &mut s1);
    }
    let s = if s0 >= 0.0 {
        s0
    } else if s1 >= 0.0 {
        s1
    } else {
        return Err(GeometryError::NoIntersection);
    };
    Ok(origin + d * s)
}

/// Angle in degrees between the outward normal at `surface_point` and the
/// Sun direction.
pub fn solar_angle(surface_point: &Vector3<f64>, sun_direction: &Vector3<f64>) -> f64 {
    let n = surface_point.normalize();
    let s = sun_direction.normalize();
    n.cross(&s).norm().atan2(n.dot(&s)).to_degrees()
}

/// Geodesic angle between two rotations in degrees.
pub fn angular_error(r1: &Rotation3<f64>, r2: &Rotation3<f64>) -> f64 {
    rotation_angle(&(r1.inverse() * r2)).to_degrees()
}
