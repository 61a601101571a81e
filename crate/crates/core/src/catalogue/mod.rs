//! Crater catalogue, spatial index and per-frame visibility pruning.

mod index;
pub mod synth;
mod visibility;

pub use index::GridIndex;
pub use visibility::{visibility_subcatalogue, VisibilityQuery};
pub(crate) use visibility::visible_indices;

use alloc::string::String;
use alloc::vec::Vec;

use nalgebra::Vector3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::CraterDisc;
use crate::MOON_RADIUS_M;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CatalogueError {
    #[error("entry {index}: {reason}")]
    Validation { index: usize, reason: &'static str },
    #[error("no catalogued crater can be in view")]
    EmptySubcatalogue,
}

/// One catalogued crater.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CatalogueEntry {
    pub id: String,
    /// Selenographic latitude, degrees.
    pub latitude: f64,
    /// Longitude in `[-180, 180)` degrees.
    pub longitude: f64,
    /// Rim diameter, metres.
    pub diameter: f64,
    /// Median rim height above the reference sphere, metres.
    pub rim_height_offset: f64,
}

impl CatalogueEntry {
    pub fn new(id: impl Into<String>, latitude: f64, longitude: f64, diameter: f64) -> Self {
        Self {
            id: id.into(),
            latitude,
            longitude,
            diameter,
            rim_height_offset: 0.0,
        }
    }

    pub fn validate(&self) -> Result<(), &'static str> {
        if !(self.latitude.abs() <= 90.0) {
            return Err("latitude outside [-90, 90]");
        }
        if !(self.longitude >= -180.0 && self.longitude < 180.0) {
            return Err("longitude outside [-180, 180)");
        }
        if !(self.diameter > 0.0 && self.diameter.is_finite()) {
            return Err("diameter must be positive");
        }
        if !self.rim_height_offset.is_finite() {
            return Err("rim height is not finite");
        }
        Ok(())
    }

    fn disc(&self, moon_radius: f64) -> CraterDisc {
        CraterDisc::circular(
            self.latitude,
            self.longitude,
            moon_radius + self.rim_height_offset,
            0.5 * self.diameter,
        )
    }
}

/// Crater catalogue with derived 3D discs and a spatial index.
///
/// A catalogue produced by [`Catalogue::subset`] remembers, per entry, the
/// index of the same crater in the catalogue it was cut from.
#[derive(Debug, Clone)]
pub struct Catalogue {
    entries: Vec<CatalogueEntry>,
    discs: Vec<CraterDisc>,
    index: GridIndex,
    parent: Vec<usize>,
    moon_radius: f64,
}

impl Catalogue {
    /// Validate entries and build discs on the default lunar sphere.
    pub fn new(entries: Vec<CatalogueEntry>) -> Result<Self, CatalogueError> {
        Self::with_radius(entries, MOON_RADIUS_M)
    }

    pub fn with_radius(
        entries: Vec<CatalogueEntry>,
        moon_radius: f64,
    ) -> Result<Self, CatalogueError> {
        for (index, e) in entries.iter().enumerate() {
            e.validate()
                .map_err(|reason| CatalogueError::Validation { index, reason })?;
        }
        let parent = (0..entries.len()).collect();
        Ok(Self::build(entries, parent, moon_radius))
    }

    fn build(entries: Vec<CatalogueEntry>, parent: Vec<usize>, moon_radius: f64) -> Self {
        let discs = entries.iter().map(|e| e.disc(moon_radius)).collect();
        let coords: Vec<(f64, f64)> = entries.iter().map(|e| (e.latitude, e.longitude)).collect();
        Self {
            index: GridIndex::build(&coords),
            entries,
            discs,
            parent,
            moon_radius,
        }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[CatalogueEntry] {
        &self.entries
    }

    pub fn discs(&self) -> &[CraterDisc] {
        &self.discs
    }

    pub fn index(&self) -> &GridIndex {
        &self.index
    }

    pub fn moon_radius(&self) -> f64 {
        self.moon_radius
    }

    /// Index of entry `i` in the catalogue this one was cut from.
    pub fn parent_index(&self, i: usize) -> usize {
        self.parent[i]
    }

    /// Smallest disc-centre radius, or the sphere radius when empty.
    pub fn min_center_radius(&self) -> f64 {
        self.discs
            .iter()
            .map(|d| d.center_world.norm())
            .fold(f64::INFINITY, f64::min)
            .min(self.moon_radius)
    }

    /// Entries whose centre direction is within `half_angle` radians of `axis`.
    pub fn query_cone(&self, axis: &Vector3<f64>, half_angle: f64) -> Vec<usize> {
        self.index.query_cone(axis, half_angle)
    }

    /// New catalogue of the given entries, in the given order.
    pub fn subset(&self, indices: &[usize]) -> Catalogue {
        let entries = indices.iter().map(|&i| self.entries[i].clone()).collect();
        let parent = indices.iter().map(|&i| self.parent[i]).collect();
        let mut sub = Self::build(entries, parent, self.moon_radius);
        // keep the exact discs rather than rebuilding them
        sub.discs = indices.iter().map(|&i| self.discs[i]).collect();
        sub
    }

    /// Position of the entry with this id.
    pub fn find_id(&self, id: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.id == id)
    }
}

/// Shift every crater radially by `height_fn(lat_deg, lon_deg)` metres.
pub fn adjust_rim_heights<F>(cat: &Catalogue, height_fn: F) -> Catalogue
where
    F: Fn(f64, f64) -> f64,
{
    let entries: Vec<CatalogueEntry> = cat
        .entries
        .iter()
        .map(|e| {
            let mut e = e.clone();
            e.rim_height_offset += height_fn(e.latitude, e.longitude);
            e
        })
        .collect();
    Catalogue::build(entries, cat.parent.clone(), cat.moon_radius)
}
