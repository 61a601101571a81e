use core::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::GeometryError;

/// Symmetric 3×3 matrix `Q` of a planar conic, `q̄ᵀ Q q̄ = 0` for homogeneous
/// points `q̄ = (x, y, 1)`.
///
/// The layout is `[[A, B, D], [B, C, E], [D, E, F]]`. Because the matrix is
/// used as a quadratic form, the off-diagonals are half the coefficients of
/// the polynomial `a x² + b xy + c y² + d x + e y + f`; see
/// [`ConicMatrix::polynomial`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConicMatrix(Matrix3<f64>);

/// Image ellipse `{x, y, â, b̂, θ}` in pixels and radians.
///
/// `theta` is the angle of the major axis from the image +x axis, in
/// `[0, π)`, and `semi_major ≥ semi_minor > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseParams {
    pub x: f64,
    pub y: f64,
    pub semi_major: f64,
    pub semi_minor: f64,
    pub theta: f64,
}

impl ConicMatrix {
    /// Wrap a matrix, symmetrising it.
    pub fn new(m: Matrix3<f64>) -> Self {
        Self((m + m.transpose()) * 0.5)
    }

    /// Build from polynomial coefficients `a x² + b xy + c y² + d x + e y + f`.
    pub fn from_polynomial(a: f64, b: f64, c: f64, d: f64, e: f64, f: f64) -> Self {
        Self(Matrix3::new(
            a,
            0.5 * b,
            0.5 * d,
            0.5 * b,
            c,
            0.5 * e,
            0.5 * d,
            0.5 * e,
            f,
        ))
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.0
    }

    /// Polynomial coefficients `[a, b, c, d, e, f]`.
    pub fn polynomial(&self) -> [f64; 6] {
        let m = &self.0;
        [
            m[(0, 0)],
            2.0 * m[(0, 1)],
            m[(1, 1)],
            2.0 * m[(0, 2)],
            2.0 * m[(1, 2)],
            m[(2, 2)],
        ]
    }

    /// `b² − 4ac` of the polynomial form; negative for ellipses.
    pub fn discriminant(&self) -> f64 {
        let [a, b, c, ..] = self.polynomial();
        b * b - 4.0 * a * c
    }

    /// Scale so the largest-magnitude entry is ±1, with the sign chosen so
    /// that points inside an ellipse evaluate negative.
    pub fn normalized(&self) -> Self {
        let scale = self.0.abs().max();
        if scale == 0.0 || !scale.is_finite() {
            return *self;
        }
        let sign = if self.0[(0, 0)] + self.0[(1, 1)] < 0.0 {
            -1.0
        } else {
            1.0
        };
        Self(self.0 * (sign / scale))
    }

    /// `q̄ᵀ Q q̄` at pixel `(x, y)`.
    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        let q = Vector3::new(x, y, 1.0);
        q.dot(&(self.0 * q))
    }
}

impl EllipseParams {
    pub fn new(x: f64, y: f64, semi_major: f64, semi_minor: f64, theta: f64) -> Self {
        Self {
            x,
            y,
            semi_major,
            semi_minor,
            theta,
        }
    }

    pub fn is_valid(&self) -> bool {
        [self.x, self.y, self.semi_major, self.semi_minor, self.theta]
            .iter()
            .all(|v| v.is_finite())
            && self.semi_minor > 0.0
            && self.semi_major >= self.semi_minor
    }

    /// Same ellipse with `â ≥ b̂` and `θ ∈ [0, π)`.
    pub fn canonical(&self) -> Self {
        let (mut a, mut b, mut th) = (self.semi_major.abs(), self.semi_minor.abs(), self.theta);
        if b > a {
            core::mem::swap(&mut a, &mut b);
            th += 0.5 * PI;
        }
        Self::new(self.x, self.y, a, b, wrap_pi(th))
    }

    /// Half extents of the axis-aligned bounding box.
    pub fn half_extents(&self) -> (f64, f64) {
        let (s, c) = self.theta.sin_cos();
        let (a2, b2) = (self.semi_major.powi(2), self.semi_minor.powi(2));
        ((a2 * c * c + b2 * s * s).sqrt(), (a2 * s * s + b2 * c * c).sqrt())
    }

    pub fn as_array(&self) -> [f64; 5] {
        [self.x, self.y, self.semi_major, self.semi_minor, self.theta]
    }
}

/// Map an angle into `[0, π)`.
pub(crate) fn wrap_pi(theta: f64) -> f64 {
    let t = crate::math::rem_euclid(theta, PI);
    if t >= PI {
        0.0
    } else {
        t + 0.0
    }
}

/// Ellipse parameters of a real-ellipse conic.
///
/// Centre from the polynomial form, `x = (2cd − be)/(b² − 4ac)`,
/// `y = (2ae − bd)/(b² − 4ac)`; semi-axes
/// `−√(2(ae² + cd² − bde + (b² − 4ac)f)((a + c) ± √((a − c)² + b²))) / (b² − 4ac)`
/// with `+` giving the major axis; orientation of the major axis
/// `θ = ½·atan2(−b, c − a)`, reduced into `[0, π)`.
pub fn conic_to_ellipse(conic: &ConicMatrix) -> Result<EllipseParams, GeometryError> {
    let mut p = conic.polynomial();
    if p[0] + p[2] < 0.0 {
        p.iter_mut().for_each(|v| *v = -*v);
    }
    let [a, b, c, d, e, f] = p;
    let scale = a.abs().max(b.abs()).max(c.abs());
    if !(scale > 0.0) || !p.iter().all(|v| v.is_finite()) {
        return Err(GeometryError::NotAnEllipse);
    }
    let disc = b * b - 4.0 * a * c;
    if disc >= -1e-14 * scale * scale {
        return Err(GeometryError::NotAnEllipse);
    }
    let x = (2.0 * c * d - b * e) / disc;
    let y = (2.0 * a * e - b * d) / disc;
    let num = 2.0 * (a * e * e + c * d * d - b * d * e + disc * f);
    let root = ((a - c) * (a - c) + b * b).sqrt();
    let major_sq = num * ((a + c) + root);
    let minor_sq = num * ((a + c) - root);
    if !(minor_sq > 0.0) || !(major_sq > 0.0) {
        return Err(GeometryError::NotAnEllipse);
    }
    let semi_major = -major_sq.sqrt() / disc;
    let semi_minor = -minor_sq.sqrt() / disc;
    let theta = wrap_pi(0.5 * (-b).atan2(c - a));
    let out = EllipseParams::new(x, y, semi_major, semi_minor, theta);
    if out.is_valid() {
        Ok(out)
    } else {
        Err(GeometryError::NotAnEllipse)
    }
}

/// Conic of an ellipse, normalised as in [`ConicMatrix::normalized`].
pub fn ellipse_to_conic(e: &EllipseParams) -> ConicMatrix {
    let (s, c) = e.theta.sin_cos();
    let (a2, b2) = (e.semi_major * e.semi_major, e.semi_minor * e.semi_minor);
    let pa = a2 * s * s + b2 * c * c;
    let pb = 2.0 * (b2 - a2) * s * c;
    let pc = a2 * c * c + b2 * s * s;
    let pd = -2.0 * pa * e.x - pb * e.y;
    let pe = -pb * e.x - 2.0 * pc * e.y;
    let pf = pa * e.x * e.x + pb * e.x * e.y + pc * e.y * e.y - a2 * b2;
    ConicMatrix::from_polynomial(pa, pb, pc, pd, pe, pf).normalized()
}
