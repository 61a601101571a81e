use nalgebra::{Matrix3, Matrix3x4, Rotation3, Vector2, Vector3};
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Pinhole intrinsics of a calibrated, distortion-free camera.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CameraIntrinsics {
    /// Focal length in pixels.
    pub focal_length: f64,
    /// Principal point `(x, y)` in pixels.
    pub principal_point: [f64; 2],
}

impl CameraIntrinsics {
    pub fn new(focal_length: f64, cx: f64, cy: f64) -> Result<Self, GeometryError> {
        let cam = Self {
            focal_length,
            principal_point: [cx, cy],
        };
        cam.validate()?;
        Ok(cam)
    }

    pub fn validate(&self) -> Result<(), GeometryError> {
        let ok = self.focal_length.is_finite()
            && self.focal_length > 0.0
            && self.principal_point.iter().all(|c| c.is_finite());
        if ok {
            Ok(())
        } else {
            Err(GeometryError::InvalidIntrinsics)
        }
    }

    pub fn matrix(&self) -> Matrix3<f64> {
        intrinsic_matrix(self)
    }

    /// Unit viewing ray in the camera frame through pixel `(x, y)`.
    pub fn ray(&self, x: f64, y: f64) -> Vector3<f64> {
        let [cx, cy] = self.principal_point;
        Vector3::new(
            (x - cx) / self.focal_length,
            (y - cy) / self.focal_length,
            1.0,
        )
        .normalize()
    }
}

/// Camera pose in the world frame.
///
/// `rotation` maps camera-frame vectors into the world frame, so the optical
/// axis in world coordinates is the third column. `position` is the camera
/// centre in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pose {
    pub rotation: Rotation3<f64>,
    pub position: Vector3<f64>,
}

impl Pose {
    pub fn new(rotation: Rotation3<f64>, position: Vector3<f64>) -> Self {
        Self { rotation, position }
    }

    /// Camera-frame coordinates of a world point.
    #[inline]
    pub fn world_to_camera(&self, p: &Vector3<f64>) -> Vector3<f64> {
        self.rotation.inverse_transform_vector(&(p - self.position))
    }

    /// Optical axis expressed in the world frame.
    #[inline]
    pub fn boresight(&self) -> Vector3<f64> {
        self.rotation.matrix().column(2).into_owned()
    }

    /// Orthonormality and handedness residuals of the rotation matrix.
    pub fn rotation_defect(&self) -> (f64, f64) {
        let m = self.rotation.matrix();
        let ortho = (m.transpose() * m - Matrix3::identity()).abs().max();
        let det = (m.determinant() - 1.0).abs();
        (ortho, det)
    }
}

/// `K = [[f, 0, x_I], [0, f, y_I], [0, 0, 1]]`.
pub fn intrinsic_matrix(cam: &CameraIntrinsics) -> Matrix3<f64> {
    let f = cam.focal_length;
    let [cx, cy] = cam.principal_point;
    Matrix3::new(f, 0.0, cx, 0.0, f, cy, 0.0, 0.0, 1.0)
}

/// `P = K · Rᵀ · [I | −t]`, mapping homogeneous world points to the image.
pub fn projection_matrix(pose: &Pose, cam: &CameraIntrinsics) -> Matrix3x4<f64> {
    let rt = pose.rotation.matrix().transpose();
    let mut ext = Matrix3x4::zeros();
    ext.fixed_view_mut::<3, 3>(0, 0).copy_from(&rt);
    ext.set_column(3, &(-(rt * pose.position)));
    intrinsic_matrix(cam) * ext
}

/// Project a world point to pixel coordinates.
pub fn project_point(
    p_world: &Vector3<f64>,
    pose: &Pose,
    cam: &CameraIntrinsics,
) -> Result<Vector2<f64>, GeometryError> {
    let q = intrinsic_matrix(cam) * pose.world_to_camera(p_world);
    if q.z.abs() < 1e-12 {
        return Err(GeometryError::AtInfinity);
    }
    if q.z <= 0.0 {
        return Err(GeometryError::BehindCamera);
    }
    Ok(Vector2::new(q.x / q.z, q.y / q.z))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{Matrix4, Vector4};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_rotation(rng: &mut ChaCha8Rng) -> Rotation3<f64> {
        let axis = Vector3::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
        );
        Rotation3::new(axis * 2.0)
    }

    #[test]
    fn intrinsic_identity_case() {
        let cam = CameraIntrinsics::new(1.0, 0.0, 0.0).unwrap();
        assert_eq!(intrinsic_matrix(&cam), Matrix3::identity());
    }

    #[test]
    fn intrinsic_direct_substitution() {
        let cam = CameraIntrinsics::new(1000.0, 512.0, 512.0).unwrap();
        let k = intrinsic_matrix(&cam);
        let want = Matrix3::new(1000.0, 0.0, 512.0, 0.0, 1000.0, 512.0, 0.0, 0.0, 1.0);
        assert_eq!(k, want);
    }

    #[test]
    fn invalid_intrinsics_rejected() {
        assert_eq!(
            CameraIntrinsics::new(0.0, 1.0, 1.0),
            Err(GeometryError::InvalidIntrinsics)
        );
        assert!(CameraIntrinsics::new(-3.0, 1.0, 1.0).is_err());
        assert!(CameraIntrinsics::new(10.0, f64::NAN, 1.0).is_err());
    }

    #[test]
    fn optical_axis_maps_to_principal_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let cam = CameraIntrinsics::new(1200.0, 480.0, 530.0).unwrap();
        for _ in 0..50 {
            let pose = Pose::new(
                random_rotation(&mut rng),
                Vector3::new(
                    rng.random_range(-1e6..1e6),
                    rng.random_range(-1e6..1e6),
                    rng.random_range(-1e6..1e6),
                ),
            );
            let depth = rng.random_range(1.0..1e6);
            let p = pose.position + pose.boresight() * depth;
            let q = project_point(&p, &pose, &cam).unwrap();
            assert!((q.x - 480.0).abs() < 1e-6 && (q.y - 530.0).abs() < 1e-6);
        }
    }

    #[test]
    fn identity_pose_direct_substitution() {
        let cam = CameraIntrinsics::new(1.0, 3.0, -2.0).unwrap();
        let pose = Pose::new(Rotation3::identity(), Vector3::zeros());
        let q = project_point(&Vector3::new(1.0, 1.0, 1.0), &pose, &cam).unwrap();
        assert_eq!(q, Vector2::new(4.0, -1.0));
    }

    #[test]
    fn behind_and_at_infinity() {
        let cam = CameraIntrinsics::new(100.0, 0.0, 0.0).unwrap();
        let pose = Pose::new(Rotation3::identity(), Vector3::zeros());
        assert_eq!(
            project_point(&Vector3::new(0.0, 0.0, -5.0), &pose, &cam),
            Err(GeometryError::BehindCamera)
        );
        assert_eq!(
            project_point(&Vector3::new(1.0, 0.0, 0.0), &pose, &cam),
            Err(GeometryError::AtInfinity)
        );
    }

    /// Independent route: explicit 4×4 homogeneous transform followed by the
    /// 3×4 canonical projection and K, evaluated step by step.
    #[test]
    fn matches_homogeneous_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let cam = CameraIntrinsics::new(900.0, 500.0, 400.0).unwrap();
        for _ in 0..200 {
            let pose = Pose::new(
                random_rotation(&mut rng),
                Vector3::new(
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                    rng.random_range(-10.0..10.0),
                ),
            );
            let cam_pt = Vector3::new(
                rng.random_range(-5.0..5.0),
                rng.random_range(-5.0..5.0),
                rng.random_range(1.0..20.0),
            );
            let world = pose.rotation * cam_pt + pose.position;

            // world -> camera as a 4x4 rigid transform
            let r = pose.rotation.matrix();
            let mut m = Matrix4::identity();
            for i in 0..3 {
                for j in 0..3 {
                    m[(i, j)] = r[(j, i)];
                }
            }
            let rt_t = r.transpose() * pose.position;
            for i in 0..3 {
                m[(i, 3)] = -rt_t[i];
            }
            let h = m * Vector4::new(world.x, world.y, world.z, 1.0);
            let u = cam.focal_length * h.x / h.z + cam.principal_point[0];
            let v = cam.focal_length * h.y / h.z + cam.principal_point[1];

            let q = project_point(&world, &pose, &cam).unwrap();
            assert!((q.x - u).abs() < 1e-8 && (q.y - v).abs() < 1e-8);

            let hp = projection_matrix(&pose, &cam) * Vector4::new(world.x, world.y, world.z, 1.0);
            assert!((hp.x / hp.z - u).abs() < 1e-8);
        }
    }
}
