//! Synthetic whole-Moon crater catalogues.
//!
//! Centres are uniform on the sphere except inside "maria" caps, where they
//! are thinned to a fraction of the highland density. Diameters follow a
//! truncated power law with cumulative slope `N(>D) ∝ D^-slope`.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Catalogue, CatalogueEntry};
use crate::geometry::surface_direction;

/// A spherical cap `(lat_deg, lon_deg, radius_deg)` of reduced density.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mare {
    pub latitude: f64,
    pub longitude: f64,
    pub radius_deg: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub count: usize,
    /// Diameter range, metres.
    pub min_diameter: f64,
    pub max_diameter: f64,
    pub slope: f64,
    pub maria: Vec<Mare>,
    /// Relative crater density inside the maria.
    pub maria_density: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            count: 150_000,
            min_diameter: 2_000.0,
            max_diameter: 100_000.0,
            slope: 2.0,
            maria: default_maria(),
            maria_density: 0.1,
            seed: 0,
        }
    }
}

/// Rough outlines of the large near-side maria.
pub fn default_maria() -> Vec<Mare> {
    [
        (32.8, -15.6, 17.0),
        (28.0, 17.5, 9.0),
        (8.5, 31.4, 10.0),
        (17.0, 59.1, 6.0),
        (-7.8, 51.3, 7.5),
        (-21.3, -16.6, 8.0),
        (-3.0, -28.0, 8.0),
        (18.4, -57.4, 14.0),
        (-24.0, -39.0, 5.0),
    ]
    .iter()
    .map(|&(latitude, longitude, radius_deg)| Mare {
        latitude,
        longitude,
        radius_deg,
    })
    .collect()
}

/// Draw the catalogue entries.
pub fn generate_entries(cfg: &SynthConfig) -> Vec<CatalogueEntry> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let caps: Vec<_> = cfg
        .maria
        .iter()
        .map(|m| {
            (
                surface_direction(m.latitude, m.longitude),
                m.radius_deg.to_radians().cos(),
            )
        })
        .collect();
    let lo = cfg.min_diameter.powf(-cfg.slope);
    let hi = cfg.max_diameter.powf(-cfg.slope);
    let mut out = Vec::with_capacity(cfg.count);
    while out.len() < cfg.count {
        let z: f64 = rng.random_range(-1.0..1.0);
        let lon: f64 = rng.random_range(-180.0..180.0);
        let lat = z.asin().to_degrees();
        let keep: f64 = rng.random();
        let u = surface_direction(lat, lon);
        if caps.iter().any(|(c, cos_r)| u.dot(c) >= *cos_r) && keep >= cfg.maria_density {
            continue;
        }
        let p: f64 = rng.random();
        let d = (lo - p * (lo - hi)).powf(-1.0 / cfg.slope);
        out.push(CatalogueEntry::new(
            format!("SYN-{:06}", out.len() + 1),
            lat,
            lon,
            d,
        ));
    }
    out
}

pub fn generate(cfg: &SynthConfig) -> Catalogue {
    Catalogue::new(generate_entries(cfg)).expect("generated entries are valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_valid() {
        let cfg = SynthConfig {
            count: 2000,
            seed: 9,
            ..SynthConfig::default()
        };
        let a = generate_entries(&cfg);
        assert_eq!(a, generate_entries(&cfg));
        assert_eq!(a.len(), 2000);
        assert_eq!(a[0].id, "SYN-000001");
        assert!(a.iter().all(|e| e.validate().is_ok()
            && e.diameter >= cfg.min_diameter
            && e.diameter <= cfg.max_diameter));
    }

    #[test]
    fn power_law_slope() {
        let cfg = SynthConfig {
            count: 100_000,
            maria: Vec::new(),
            ..SynthConfig::default()
        };
        let e = generate_entries(&cfg);
        let above = |d: f64| e.iter().filter(|x| x.diameter > d).count() as f64;
        // N(>4 km) / N(>8 km) = 4 for slope 2, up to truncation
        let ratio = above(4_000.0) / above(8_000.0);
        let want = (4e3f64.powi(-2) - 1e5f64.powi(-2)) / (8e3f64.powi(-2) - 1e5f64.powi(-2));
        assert!((ratio - want).abs() / want < 0.05, "{ratio} vs {want}");
    }

    #[test]
    fn maria_are_sparse() {
        let cfg = SynthConfig {
            count: 100_000,
            ..SynthConfig::default()
        };
        let e = generate_entries(&cfg);
        let imbrium = surface_direction(32.8, -15.6);
        let farside = surface_direction(-32.8, 164.4);
        let cap = 10f64.to_radians().cos();
        let count = |c: &nalgebra::Vector3<f64>| {
            e.iter()
                .filter(|x| surface_direction(x.latitude, x.longitude).dot(c) >= cap)
                .count() as f64
        };
        let (mare, highland) = (count(&imbrium), count(&farside));
        assert!(mare < 0.2 * highland, "{mare} vs {highland}");
    }
}
