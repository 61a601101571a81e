use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Vector3;
#[allow(unused_imports)]
use num_traits::Float;

/// Latitude/longitude bucket grid over unit directions.
///
/// Rows are latitude bands of `cell_deg`; every band except the two touching
/// the poles is split into longitude columns of the same width, the polar
/// bands are single buckets. Items are stored bucket by bucket (CSR) with
/// their unit vectors alongside, so a cone query scans contiguous memory.
#[derive(Debug, Clone, PartialEq)]
pub struct GridIndex {
    cell_deg: f64,
    rows: usize,
    cols: usize,
    /// `cell_start[b]..cell_start[b + 1]` indexes `items` for bucket `b`.
    cell_start: Vec<u32>,
    items: Vec<u32>,
    dirs: Vec<Vector3<f64>>,
}

impl GridIndex {
    /// Index unit directions given as `(lat_deg, lon_deg)` pairs, with a cell
    /// size adapted to the item count.
    pub fn build(coords: &[(f64, f64)]) -> Self {
        // about four items per cell on average over the sphere
        let sphere_deg2 = 41_252.96;
        let cell = (4.0 * sphere_deg2 / coords.len().max(1) as f64)
            .sqrt()
            .clamp(0.25, 30.0);
        Self::with_cell_size(coords, cell)
    }

    pub fn with_cell_size(coords: &[(f64, f64)], cell_deg: f64) -> Self {
        let rows = ((180.0 / cell_deg).ceil() as usize).max(3);
        let cols = ((360.0 / cell_deg).ceil() as usize).max(1);
        let mut grid = Self {
            cell_deg: 180.0 / rows as f64,
            rows,
            cols,
            cell_start: Vec::new(),
            items: Vec::new(),
            dirs: Vec::new(),
        };
        let buckets = grid.bucket_count();
        let keys: Vec<usize> = coords
            .iter()
            .map(|&(lat, lon)| grid.bucket_of(lat, lon))
            .collect();
        let mut counts = vec![0u32; buckets + 1];
        for &k in &keys {
            counts[k + 1] += 1;
        }
        for b in 0..buckets {
            counts[b + 1] += counts[b];
        }
        let mut fill = counts.clone();
        grid.items = vec![0; coords.len()];
        grid.dirs = vec![Vector3::zeros(); coords.len()];
        for (i, (&k, &(lat, lon))) in keys.iter().zip(coords).enumerate() {
            let slot = fill[k] as usize;
            grid.items[slot] = i as u32;
            grid.dirs[slot] = crate::geometry::surface_direction(lat, lon);
            fill[k] += 1;
        }
        grid.cell_start = counts;
        grid
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn cell_size_deg(&self) -> f64 {
        self.cell_deg
    }

    fn bucket_count(&self) -> usize {
        2 + (self.rows - 2) * self.cols
    }

    fn row_of(&self, lat: f64) -> usize {
        (((lat + 90.0) / self.cell_deg).floor().max(0.0) as usize).min(self.rows - 1)
    }

    fn col_of(&self, lon: f64) -> usize {
        let l = crate::math::rem_euclid(lon + 180.0, 360.0);
        ((l / 360.0 * self.cols as f64).floor() as usize).min(self.cols - 1)
    }

    fn bucket(&self, row: usize, col: usize) -> usize {
        if row == 0 {
            0
        } else if row == self.rows - 1 {
            self.bucket_count() - 1
        } else {
            1 + (row - 1) * self.cols + col
        }
    }

    fn bucket_of(&self, lat: f64, lon: f64) -> usize {
        self.bucket(self.row_of(lat), self.col_of(lon))
    }

    /// Indices of all items within `half_angle` radians of the unit vector
    /// `axis`, in increasing order.
    pub fn query_cone(&self, axis: &Vector3<f64>, half_angle: f64) -> Vec<usize> {
        let mut out = Vec::new();
        if self.items.is_empty() || half_angle < 0.0 {
            return out;
        }
        let axis = axis.normalize();
        let cos_limit = half_angle.min(core::f64::consts::PI).cos();
        let mut scan = |b: usize| {
            let (s, e) = (self.cell_start[b] as usize, self.cell_start[b + 1] as usize);
            for k in s..e {
                if self.dirs[k].dot(&axis) >= cos_limit {
                    out.push(self.items[k] as usize);
                }
            }
        };
        let lat_c = axis.z.clamp(-1.0, 1.0).asin().to_degrees();
        let lon_c = axis.y.atan2(axis.x).to_degrees();
        let psi = half_angle.to_degrees();
        // pad by a hair so items on a bucket edge are never skipped
        let pad = 1e-9;
        let lat_lo = lat_c - psi - pad;
        let lat_hi = lat_c + psi + pad;
        let (r0, r1) = (self.row_of(lat_lo.max(-90.0)), self.row_of(lat_hi.min(90.0)));

        // a cone containing a pole spans every longitude
        let half_lon = if psi >= 90.0 - lat_c.abs() {
            180.0
        } else {
            let s = psi.to_radians().sin() / lat_c.to_radians().cos();
            if s >= 1.0 {
                180.0
            } else {
                s.asin().to_degrees() + pad
            }
        };
        for row in r0..=r1 {
            if row == 0 || row == self.rows - 1 {
                scan(self.bucket(row, 0));
                continue;
            }
            if half_lon >= 180.0 {
                for col in 0..self.cols {
                    scan(self.bucket(row, col));
                }
                continue;
            }
            let c0 = self.col_of(lon_c - half_lon);
            let c1 = self.col_of(lon_c + half_lon);
            let mut col = c0;
            loop {
                scan(self.bucket(row, col));
                if col == c1 {
                    break;
                }
                col = (col + 1) % self.cols;
            }
        }
        out.sort_unstable();
        out
    }
}
