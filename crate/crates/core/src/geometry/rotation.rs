use nalgebra::{Rotation3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;

/// Rotation `exp([ω]×)` of a tangent vector.
#[inline]
pub fn so3_exp(omega: &Vector3<f64>) -> Rotation3<f64> {
    Rotation3::new(*omega)
}

/// Tangent vector `ω` with `so3_exp(ω) = r` and `‖ω‖ ≤ π`.
pub fn so3_log(r: &Rotation3<f64>) -> Vector3<f64> {
    let m = r.matrix();
    let v = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    );
    let s = 0.5 * v.norm();
    let c = 0.5 * (m.trace() - 1.0);
    let angle = s.atan2(c);
    if angle < 1e-8 {
        return 0.5 * v;
    }
    if s > 1e-6 {
        return v * (0.5 * angle / s);
    }
    // Near π the antisymmetric part vanishes; nalgebra handles the axis.
    r.scaled_axis()
}

/// Rotation angle of `r` in radians, in `[0, π]`.
///
/// Uses `atan2(‖vee(R − Rᵀ)‖/2, (tr R − 1)/2)`, which equals the clamped
/// `acos((tr R − 1)/2)` but keeps full precision near zero.
pub fn rotation_angle(r: &Rotation3<f64>) -> f64 {
    let m = r.matrix();
    let v = Vector3::new(
        m[(2, 1)] - m[(1, 2)],
        m[(0, 2)] - m[(2, 0)],
        m[(1, 0)] - m[(0, 1)],
    );
    let c = (0.5 * (m.trace() - 1.0)).clamp(-1.0, 1.0);
    (0.5 * v.norm()).atan2(c)
}
