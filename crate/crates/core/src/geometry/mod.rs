//! Reference frames, camera projection and crater-rim conics.
//!
//! Frames: the world frame (WRF) is Moon-centred and Moon-fixed; the camera
//! frame (CRF) has its optical axis along +Z, +X along image rows and +Y
//! down the image; the image frame (IRF) is in pixels. A [`Pose`] stores the
//! CRF→WRF rotation and the camera centre in the WRF.

mod camera;
mod conic;
mod crater;
mod rotation;
mod sphere;

pub use camera::{intrinsic_matrix, project_point, projection_matrix, CameraIntrinsics, Pose};
pub use conic::{conic_to_ellipse, ellipse_to_conic, ConicMatrix, EllipseParams};
pub use crater::{
    crater_homography, enu_frame, project_crater, project_crater_conic, surface_direction,
    CraterDisc,
};
pub use rotation::{rotation_angle, so3_exp, so3_log};
pub use sphere::{angular_error, solar_angle, surface_intersection};
#[cfg(test)]
pub(crate) use sphere::ray_sphere;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("invalid camera intrinsics")]
    InvalidIntrinsics,
    #[error("point lies behind the camera")]
    BehindCamera,
    #[error("point projects to infinity")]
    AtInfinity,
    #[error("disc plane passes through the camera centre")]
    DegenerateHomography,
    #[error("projected rim is not an ellipse")]
    DegenerateConic,
    #[error("conic does not describe a real ellipse")]
    NotAnEllipse,
    #[error("line of sight does not intersect the surface")]
    NoIntersection,
}
