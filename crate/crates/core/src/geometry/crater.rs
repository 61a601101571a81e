use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

use super::conic::{conic_to_ellipse, ellipse_to_conic, ConicMatrix, EllipseParams};
use super::{intrinsic_matrix, CameraIntrinsics, GeometryError, Pose};

/// A catalogued crater rim: an ellipse in the local tangent plane at
/// `center_world`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CraterDisc {
    pub center_world: Vector3<f64>,
    /// Columns East, North, Up.
    pub enu_frame: Matrix3<f64>,
    /// Semi-axes in metres, major first.
    pub semi_axes: [f64; 2],
    /// Angle of the major axis from East towards North, radians.
    pub rim_orientation: f64,
    /// Rim conic in local `(east, north, 1)` coordinates.
    pub local_conic: ConicMatrix,
}

impl CraterDisc {
    pub fn new(
        center_world: Vector3<f64>,
        enu_frame: Matrix3<f64>,
        semi_axes: [f64; 2],
        rim_orientation: f64,
    ) -> Self {
        let local = EllipseParams::new(0.0, 0.0, semi_axes[0], semi_axes[1], rim_orientation);
        Self {
            center_world,
            enu_frame,
            semi_axes,
            rim_orientation,
            local_conic: ellipse_to_conic(&local),
        }
    }

    /// Circular disc of the given radius centred `center_radius` metres from
    /// the Moon's centre at selenographic `(lat, lon)` in degrees.
    pub fn circular(lat_deg: f64, lon_deg: f64, center_radius: f64, radius: f64) -> Self {
        let enu = enu_frame(lat_deg, lon_deg);
        let up = enu.column(2).into_owned();
        Self::new(up * center_radius, enu, [radius, radius], 0.0)
    }

    pub fn up(&self) -> Vector3<f64> {
        self.enu_frame.column(2).into_owned()
    }

    /// World point at local plane coordinates `(e, n)`.
    pub fn local_to_world(&self, e: f64, n: f64) -> Vector3<f64> {
        self.center_world + self.enu_frame.column(0) * e + self.enu_frame.column(1) * n
    }

    /// Rim point at eccentric parameter `phi`.
    pub fn rim_point(&self, phi: f64) -> Vector3<f64> {
        let (s, c) = self.rim_orientation.sin_cos();
        let (u, v) = (self.semi_axes[0] * phi.cos(), self.semi_axes[1] * phi.sin());
        self.local_to_world(c * u - s * v, s * u + c * v)
    }

    /// Radius of the bounding sphere of the rim.
    pub fn bounding_radius(&self) -> f64 {
        self.semi_axes[0].max(self.semi_axes[1])
    }
}

/// Outward unit normal of the spherical Moon at `(lat, lon)` degrees.
pub fn surface_direction(lat_deg: f64, lon_deg: f64) -> Vector3<f64> {
    let (sp, cp) = lat_deg.to_radians().sin_cos();
    let (sl, cl) = lon_deg.to_radians().sin_cos();
    Vector3::new(cp * cl, cp * sl, sp)
}

/// Local East-North-Up frame at `(lat, lon)` degrees; columns E, N, U.
pub fn enu_frame(lat_deg: f64, lon_deg: f64) -> Matrix3<f64> {
    let (sp, cp) = lat_deg.to_radians().sin_cos();
    let (sl, cl) = lon_deg.to_radians().sin_cos();
    let east = Vector3::new(-sl, cl, 0.0);
    let north = Vector3::new(-sp * cl, -sp * sl, cp);
    let up = Vector3::new(cp * cl, cp * sl, sp);
    Matrix3::from_columns(&[east, north, up])
}

/// Homography from local disc-plane coordinates `(e, n, 1)` to homogeneous
/// image points, `H = K·Rᵀ·[E  N  c_W − t]`.
pub fn crater_homography(
    disc: &CraterDisc,
    pose: &Pose,
    cam: &CameraIntrinsics,
) -> Result<Matrix3<f64>, GeometryError> {
    let rt = pose.rotation.matrix().transpose();
    let b = Matrix3::from_columns(&[
        disc.enu_frame.column(0).into_owned(),
        disc.enu_frame.column(1).into_owned(),
        disc.center_world - pose.position,
    ]);
    let h = intrinsic_matrix(cam) * rt * b;
    let mut unit = h;
    for mut col in unit.column_iter_mut() {
        let n = col.norm();
        if n > 0.0 {
            col /= n;
        }
    }
    if !(unit.determinant().abs() >= 1e-12) {
        return Err(GeometryError::DegenerateHomography);
    }
    Ok(h)
}

/// Image conic of the crater rim, `E ∝ H⁻ᵀ·C·H⁻¹`, normalised.
pub fn project_crater_conic(
    disc: &CraterDisc,
    pose: &Pose,
    cam: &CameraIntrinsics,
) -> Result<ConicMatrix, GeometryError> {
    // Every rim point must lie in front of the camera: the depth along the
    // rim is linear in the plane coordinates, so its minimum is closed form.
    let rt = pose.rotation.matrix().transpose();
    let zc = (rt * (disc.center_world - pose.position)).z;
    let ez = (rt * disc.enu_frame.column(0)).z;
    let nz = (rt * disc.enu_frame.column(1)).z;
    let (s, c) = disc.rim_orientation.sin_cos();
    let along_major = c * ez + s * nz;
    let along_minor = -s * ez + c * nz;
    let spread = ((disc.semi_axes[0] * along_major).powi(2)
        + (disc.semi_axes[1] * along_minor).powi(2))
    .sqrt();
    if !(zc - spread > 0.0) {
        return Err(GeometryError::DegenerateConic);
    }

    let h = crater_homography(disc, pose, cam)?;
    let hinv = h.try_inverse().ok_or(GeometryError::DegenerateHomography)?;
    let e = ConicMatrix::new(hinv.transpose() * disc.local_conic.matrix() * hinv).normalized();
    if e.discriminant() >= 0.0 {
        return Err(GeometryError::DegenerateConic);
    }
    Ok(e)
}

/// Image ellipse of the crater rim.
pub fn project_crater(
    disc: &CraterDisc,
    pose: &Pose,
    cam: &CameraIntrinsics,
) -> Result<EllipseParams, GeometryError> {
    conic_to_ellipse(&project_crater_conic(disc, pose, cam)?)
}
