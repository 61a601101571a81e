use nalgebra::{Rotation3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};

use super::OdError;

/// Classical orbital elements; lengths in km, angles in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KeplerianElements {
    pub semi_major_axis: f64,
    pub eccentricity: f64,
    pub inclination: f64,
    pub raan: f64,
    pub arg_periapsis: f64,
    pub true_anomaly: f64,
}

impl KeplerianElements {
    pub fn is_valid(&self) -> bool {
        self.semi_major_axis > 0.0
            && (0.0..1.0).contains(&self.eccentricity)
            && [self.inclination, self.raan, self.arg_periapsis, self.true_anomaly]
                .iter()
                .all(|a| a.is_finite())
    }

    /// The same orbit with every angle wrapped into `[0, 360)`.
    pub fn normalized(&self) -> Self {
        Self {
            inclination: wrap_360(self.inclination),
            raan: wrap_360(self.raan),
            arg_periapsis: wrap_360(self.arg_periapsis),
            true_anomaly: wrap_360(self.true_anomaly),
            ..*self
        }
    }
}

/// Cartesian state, km and km/s, at `epoch` seconds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    pub position: Vector3<f64>,
    pub velocity: Vector3<f64>,
    pub epoch: f64,
}

impl StateVector {
    pub fn new(position: Vector3<f64>, velocity: Vector3<f64>, epoch: f64) -> Self {
        Self {
            position,
            velocity,
            epoch,
        }
    }

    /// Specific orbital energy, km²/s².
    pub fn energy(&self, mu: f64) -> f64 {
        0.5 * self.velocity.norm_squared() - mu / self.position.norm()
    }

    /// Specific angular momentum, km²/s.
    pub fn angular_momentum(&self) -> Vector3<f64> {
        self.position.cross(&self.velocity)
    }
}

pub(crate) fn wrap_360(deg: f64) -> f64 {
    crate::math::rem_euclid(deg, 360.0)
}

/// Perifocal-to-inertial rotation `R3(Ω)·R1(i)·R3(ω)`.
fn perifocal_rotation(raan: f64, inc: f64, argp: f64) -> Rotation3<f64> {
    Rotation3::from_axis_angle(&Vector3::z_axis(), raan)
        * Rotation3::from_axis_angle(&Vector3::x_axis(), inc)
        * Rotation3::from_axis_angle(&Vector3::z_axis(), argp)
}

/// State at `epoch = 0` for the given elements.
pub fn koe_to_state(koe: &KeplerianElements, mu: f64) -> StateVector {
    let a = koe.semi_major_axis;
    let e = koe.eccentricity;
    let p = a * (1.0 - e * e);
    let (sn, cn) = koe.true_anomaly.to_radians().sin_cos();
    let r = p / (1.0 + e * cn);
    let vs = (mu / p).sqrt();
    let rot = perifocal_rotation(
        koe.raan.to_radians(),
        koe.inclination.to_radians(),
        koe.arg_periapsis.to_radians(),
    );
    StateVector::new(
        rot * Vector3::new(r * cn, r * sn, 0.0),
        rot * Vector3::new(-vs * sn, vs * (e + cn), 0.0),
        0.0,
    )
}

/// Inverse of [`koe_to_state`].
///
/// On the singular sets the undefined angles are fixed: `Ω = 0` when the
/// inclination is below 1e-9°, `ω = 0` when the eccentricity is below 1e-12.
/// The true anomaly then absorbs the remaining phase.
pub fn state_to_koe(sv: &StateVector, mu: f64) -> Result<KeplerianElements, OdError> {
    let r = sv.position;
    let v = sv.velocity;
    let rn = r.norm();
    let h = r.cross(&v);
    let hn = h.norm();
    if !(rn > 0.0) || !(hn > 1e-12 * rn * v.norm()) {
        return Err(OdError::Degenerate);
    }
    let ev = ((v.norm_squared() - mu / rn) * r - r.dot(&v) * v) / mu;
    let e = ev.norm();
    let inv_a = 2.0 / rn - v.norm_squared() / mu;
    if !(e < 1.0 - 1e-9) || !(inv_a > 0.0) {
        return Err(OdError::Degenerate);
    }
    let hz = h / hn;
    let inc = hz.z.clamp(-1.0, 1.0).acos();
    let equatorial = inc.to_degrees() < 1e-9 || inc.to_degrees() > 180.0 - 1e-9;
    let raan = if equatorial { 0.0 } else { hz.x.atan2(-hz.y) };
    let node = Vector3::new(raan.cos(), raan.sin(), 0.0);
    let q = hz.cross(&node);
    let argp = if e < 1e-12 { 0.0 } else { ev.dot(&q).atan2(ev.dot(&node)) };
    let u = r.dot(&q).atan2(r.dot(&node));
    Ok(KeplerianElements {
        semi_major_axis: 1.0 / inv_a,
        eccentricity: e,
        inclination: inc.to_degrees(),
        raan: wrap_360(raan.to_degrees()),
        arg_periapsis: wrap_360(argp.to_degrees()),
        true_anomaly: wrap_360((u - argp).to_degrees()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::MU_MOON_KM3_S2 as MU;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    pub(crate) fn table2() -> KeplerianElements {
        KeplerianElements {
            semi_major_axis: 1837.7,
            eccentricity: 3.8e-4,
            inclination: 90.0,
            raan: 227.0,
            arg_periapsis: 295.0,
            true_anomaly: 91.0,
        }
    }

    fn angle_diff(a: f64, b: f64) -> f64 {
        let d = (a - b).rem_euclid(360.0);
        d.min(360.0 - d)
    }

    #[test]
    fn circular_equatorial() {
        let koe = KeplerianElements {
            semi_major_axis: 2000.0,
            eccentricity: 0.0,
            inclination: 0.0,
            raan: 0.0,
            arg_periapsis: 0.0,
            true_anomaly: 0.0,
        };
        let sv = koe_to_state(&koe, MU);
        assert!((sv.position - Vector3::new(2000.0, 0.0, 0.0)).norm() < 1e-12);
        assert!((sv.velocity.norm() - (MU / 2000.0).sqrt()).abs() < 1e-14);
        let back = state_to_koe(&sv, MU).unwrap();
        assert!(back.eccentricity < 1e-12);
        assert!(back.inclination < 1e-9);
    }

    #[test]
    fn table2_round_trip() {
        let koe = table2();
        let back = state_to_koe(&koe_to_state(&koe, MU), MU).unwrap();
        assert!((back.semi_major_axis - koe.semi_major_axis).abs() / koe.semi_major_axis < 1e-9);
        assert!((back.eccentricity - koe.eccentricity).abs() / koe.eccentricity < 1e-9);
        for (x, y) in [
            (back.inclination, koe.inclination),
            (back.raan, koe.raan),
            (back.arg_periapsis, koe.arg_periapsis),
            (back.true_anomaly, koe.true_anomaly),
        ] {
            assert!(angle_diff(x, y) < 1e-9 * 360.0, "{x} vs {y}");
        }
    }

    fn random_koe(rng: &mut ChaCha8Rng) -> KeplerianElements {
        KeplerianElements {
            semi_major_axis: rng.random_range(1750.0..10_000.0),
            eccentricity: rng.random_range(1e-3..0.9),
            inclination: rng.random_range(1.0..179.0),
            raan: rng.random_range(0.0..360.0),
            arg_periapsis: rng.random_range(0.0..360.0),
            true_anomaly: rng.random_range(0.0..360.0),
        }
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let koe = random_koe(&mut rng);
            let back = state_to_koe(&koe_to_state(&koe, MU), MU).unwrap();
            assert!((back.semi_major_axis / koe.semi_major_axis - 1.0).abs() < 1e-9);
            assert!((back.eccentricity / koe.eccentricity - 1.0).abs() < 1e-9);
            for (x, y) in [
                (back.inclination, koe.inclination),
                (back.raan, koe.raan),
                (back.arg_periapsis, koe.arg_periapsis),
                (back.true_anomaly, koe.true_anomaly),
            ] {
                assert!(angle_diff(x, y) < 1e-9 * 360.0, "{koe:?} {back:?}");
            }
        }
    }

    #[test]
    fn vis_viva() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let koe = random_koe(&mut rng);
            let sv = koe_to_state(&koe, MU);
            let lhs = sv.velocity.norm_squared();
            let rhs = MU * (2.0 / sv.position.norm() - 1.0 / koe.semi_major_axis);
            assert!((lhs - rhs).abs() <= 1e-12 * rhs);
        }
    }

    #[test]
    fn singular_sets_have_canonical_angles() {
        let eq = KeplerianElements {
            inclination: 0.0,
            raan: 40.0,
            arg_periapsis: 30.0,
            true_anomaly: 10.0,
            ..table2()
        };
        let back = state_to_koe(&koe_to_state(&eq, MU), MU).unwrap();
        assert_eq!(back.raan, 0.0);
        // longitude of periapsis and true longitude survive
        assert!(angle_diff(back.arg_periapsis, 70.0) < 1e-6);
        assert!(angle_diff(back.arg_periapsis + back.true_anomaly, 80.0) < 1e-9);

        let circ = KeplerianElements {
            eccentricity: 0.0,
            ..table2()
        };
        let back = state_to_koe(&koe_to_state(&circ, MU), MU).unwrap();
        assert!(back.eccentricity < 1e-12);
        assert!(back.arg_periapsis == 0.0 || back.eccentricity >= 1e-12);
        assert!(angle_diff(back.arg_periapsis + back.true_anomaly, 295.0 + 91.0) < 1e-9);
    }

    #[test]
    fn degenerate_states() {
        let radial = StateVector::new(Vector3::new(2000.0, 0.0, 0.0), Vector3::new(1.0, 0.0, 0.0), 0.0);
        assert_eq!(state_to_koe(&radial, MU), Err(OdError::Degenerate));
        let escape = StateVector::new(
            Vector3::new(2000.0, 0.0, 0.0),
            Vector3::new(0.0, (2.0 * MU / 2000.0).sqrt() * 1.01, 0.0),
            0.0,
        );
        assert_eq!(state_to_koe(&escape, MU), Err(OdError::Degenerate));
    }

    #[test]
    fn normalisation_wraps_angles() {
        let k = KeplerianElements {
            raan: -10.0,
            true_anomaly: 725.0,
            ..table2()
        }
        .normalized();
        assert!((k.raan - 350.0).abs() < 1e-12);
        assert!((k.true_anomaly - 5.0).abs() < 1e-12);
        assert!(k.is_valid());
    }
}
