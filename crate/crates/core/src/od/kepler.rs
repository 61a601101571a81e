use core::f64::consts::TAU;

#[allow(unused_imports)]
use num_traits::Float;

use super::{OdError, StateVector};

/// Orbital period for semi-major axis `a` km.
pub fn orbital_period(a: f64, mu: f64) -> f64 {
    TAU * (a * a * a / mu).sqrt()
}

/// Two-body state at `sv.epoch + dt`.
///
/// Solves Kepler's equation in the eccentric-anomaly difference with Newton
/// iteration and applies the Lagrange f and g coefficients, which stays well
/// conditioned at zero eccentricity. Whole revolutions are removed first.
pub fn propagate(sv: &StateVector, dt: f64, mu: f64) -> Result<StateVector, OdError> {
    if dt == 0.0 {
        return Ok(*sv);
    }
    let r0 = sv.position;
    let v0 = sv.velocity;
    let r0n = r0.norm();
    let inv_a = 2.0 / r0n - v0.norm_squared() / mu;
    if !(inv_a > 0.0) || !dt.is_finite() {
        return Err(OdError::Degenerate);
    }
    let a = 1.0 / inv_a;
    let n = (mu * inv_a * inv_a * inv_a).sqrt();
    let sqrt_mu_a = (mu * a).sqrt();
    // e·cos E0 and e·sin E0
    let ec = 1.0 - r0n * inv_a;
    let es = r0.dot(&v0) / sqrt_mu_a;

    let revs = (n * dt / TAU).round();
    let dt_rem = dt - revs * TAU / n;
    let m = n * dt_rem;
    let mut de = m;
    let mut done = false;
    for _ in 0..50 {
        let (s, c) = de.sin_cos();
        let f = de - ec * s + es * (1.0 - c) - m;
        let fp = 1.0 - ec * c + es * s;
        let step = f / fp;
        de -= step;
        if step.abs() < 1e-12 {
            done = true;
            break;
        }
    }
    if !done || !de.is_finite() {
        return Err(OdError::KeplerNoConvergence);
    }
    let (s, c) = de.sin_cos();
    let f = 1.0 - a / r0n * (1.0 - c);
    let g = dt_rem - (de - s) / n;
    let r = f * r0 + g * v0;
    let rn = a + (r0n - a) * c + r0.dot(&v0) / n / a * s;
    let fdot = -sqrt_mu_a / (rn * r0n) * s;
    let gdot = 1.0 - a / rn * (1.0 - c);
    Ok(StateVector::new(r, fdot * r0 + gdot * v0, sv.epoch + dt))
}
