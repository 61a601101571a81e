use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

use super::OdError;

/// Velocity at `r2` of the conic through three sequential positions (km).
pub fn gibbs_velocity(
    r1: &Vector3<f64>,
    r2: &Vector3<f64>,
    r3: &Vector3<f64>,
    mu: f64,
) -> Result<Vector3<f64>, OdError> {
    let (n1, n2, n3) = (r1.norm(), r2.norm(), r3.norm());
    let sep = |a: &Vector3<f64>, b: &Vector3<f64>| a.cross(b).norm().atan2(a.dot(b));
    let min_sep = 0.1f64.to_radians();
    if sep(r1, r2) < min_sep || sep(r2, r3) < min_sep || sep(r1, r3) < min_sep {
        return Err(OdError::TooClose);
    }
    let c23 = r2.cross(r3);
    let c31 = r3.cross(r1);
    let c12 = r1.cross(r2);
    if (r1 / n1).dot(&c23.normalize()).abs() > 1f64.to_radians().sin() {
        return Err(OdError::NotCoplanar);
    }
    let n = n1 * c23 + n2 * c31 + n3 * c12;
    let d = c12 + c23 + c31;
    let s = (n2 - n3) * r1 + (n3 - n1) * r2 + (n1 - n2) * r3;
    let nd = n.dot(&d);
    // a straight line through the points leaves D (and the orbit) undefined
    if !(nd > 1e-12 * n.norm() * d.norm()) || d.norm() < 1e-9 * n1 * n2 {
        return Err(OdError::NotCoplanar);
    }
    let v = (mu / nd).sqrt() * (d.cross(r2) / n2 + s);
    if v.iter().all(|x| x.is_finite()) {
        Ok(v)
    } else {
        Err(OdError::NotCoplanar)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::od::{koe_to_state, propagate, KeplerianElements};
    use crate::MU_MOON_KM3_S2 as MU;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn circular_orbit() {
        let r = 1900.0;
        let at = |deg: f64| {
            let (s, c) = deg.to_radians().sin_cos();
            Vector3::new(r * c, r * s * 0.6, r * s * 0.8)
        };
        let v = gibbs_velocity(&at(0.0), &at(20.0), &at(45.0), MU).unwrap();
        assert!((v.norm() - (MU / r).sqrt()).abs() < 1e-9);
        assert!(v.dot(&at(20.0)).abs() < 1e-9);
    }

    #[test]
    fn table2_cadence_matches_propagator() {
        let koe = KeplerianElements {
            semi_major_axis: 1837.7,
            eccentricity: 3.8e-4,
            inclination: 90.0,
            raan: 227.0,
            arg_periapsis: 295.0,
            true_anomaly: 91.0,
        };
        let s1 = koe_to_state(&koe, MU);
        let s2 = propagate(&s1, 1200.0, MU).unwrap();
        let s3 = propagate(&s1, 2400.0, MU).unwrap();
        let v = gibbs_velocity(&s1.position, &s2.position, &s3.position, MU).unwrap();
        assert!((v - s2.velocity).norm() < 1e-6);
    }

    #[test]
    fn random_separations() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let koe = KeplerianElements {
                semi_major_axis: rng.random_range(1800.0..5000.0),
                eccentricity: rng.random_range(0.0..0.5),
                inclination: rng.random_range(0.0..180.0),
                raan: rng.random_range(0.0..360.0),
                arg_periapsis: rng.random_range(0.0..360.0),
                true_anomaly: rng.random_range(0.0..360.0),
            };
            let s2 = koe_to_state(&koe, MU);
            let h = s2.angular_momentum().norm();
            // time for roughly the requested angular step at r2
            let step = |deg: f64| deg.to_radians() * s2.position.norm_squared() / h;
            let (a, b): (f64, f64) = (rng.random_range(0.5..30.0), rng.random_range(0.5..30.0));
            let s1 = propagate(&s2, -step(a), MU).unwrap();
            let s3 = propagate(&s2, step(b), MU).unwrap();
            let v = gibbs_velocity(&s1.position, &s2.position, &s3.position, MU).unwrap();
            assert!((v - s2.velocity).norm() < 1e-6, "{}", (v - s2.velocity).norm());
        }
    }

    #[test]
    fn degenerate_inputs() {
        let r1 = Vector3::new(2000.0, 0.0, 0.0);
        assert_eq!(
            gibbs_velocity(&r1, &(r1 * 1.1), &(r1 * 1.2), MU),
            Err(OdError::TooClose)
        );
        // collinear, off the origin
        let p = Vector3::new(2000.0, -500.0, 0.0);
        let d = Vector3::new(0.0, 1.0, 0.0);
        assert_eq!(
            gibbs_velocity(&p, &(p + d * 500.0), &(p + d * 1000.0), MU),
            Err(OdError::NotCoplanar)
        );
        let tilted = Vector3::new(0.0, 1900.0, 300.0);
        assert_eq!(
            gibbs_velocity(&r1, &Vector3::new(0.0, 2000.0, 0.0), &tilted, MU),
            Err(OdError::NotCoplanar)
        );
    }
}
