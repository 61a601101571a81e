//! File formats: catalogue, frames, detections, positions, reports.
//!
//! Floats are written with `Display`, which round-trips every `f64` exactly.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use crater_nav_core::catalogue::{Catalogue, CatalogueEntry};
use crater_nav_core::detector::{Detection, FrameDetections};
use crater_nav_core::geometry::{EllipseParams, Pose};
use crater_nav_core::mission::MissionFrame;
use crater_nav_core::od::TimedPosition;
use crater_nav_core::pipeline::{Bin, FrameErrors, FrameReport, FrameStatus};
use nalgebra::{Quaternion, Rotation3, UnitQuaternion, Vector3};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },
    #[error("line {line}: {reason}")]
    Validation { line: u64, reason: String },
    #[error("missing column `{0}`")]
    MissingColumn(&'static str),
}

impl LoadError {
    fn from_csv(e: csv::Error) -> Self {
        let line = e.position().map_or(0, |p| p.line());
        if e.is_io_error() {
            match e.into_kind() {
                csv::ErrorKind::Io(io) => return LoadError::Io(io),
                _ => unreachable!(),
            }
        }
        LoadError::Parse {
            line,
            message: e.to_string(),
        }
    }
}

fn csv_reader<R: Read>(r: R) -> csv::Reader<R> {
    csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r)
}

fn csv_writer(path: &Path) -> std::io::Result<csv::Writer<BufWriter<File>>> {
    Ok(csv::Writer::from_writer(BufWriter::new(File::create(path)?)))
}

fn flush<W: Write>(w: csv::Writer<W>) -> std::io::Result<()> {
    w.into_inner().map_err(|e| e.into_error())?.flush()
}

// ---- catalogue ---------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct CatalogueRow {
    id: String,
    lat_deg: f64,
    lon_deg: f64,
    diameter_m: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rim_height_m: Option<f64>,
}

/// Parse catalogue CSV with header `id,lat_deg,lon_deg,diameter_m[,rim_height_m]`.
pub fn read_catalogue_entries<R: Read>(r: R) -> Result<Vec<CatalogueEntry>, LoadError> {
    let mut rdr = csv_reader(r);
    let headers = rdr.headers().map_err(LoadError::from_csv)?.clone();
    for col in ["id", "lat_deg", "lon_deg", "diameter_m"] {
        if !headers.iter().any(|h| h == col) {
            return Err(LoadError::MissingColumn(col));
        }
    }
    let mut entries = Vec::new();
    let mut record = csv::StringRecord::new();
    while rdr.read_record(&mut record).map_err(LoadError::from_csv)? {
        let line = record.position().map_or(0, |p| p.line());
        let row: CatalogueRow = record.deserialize(Some(&headers)).map_err(|e| LoadError::Parse {
            line,
            message: e.to_string(),
        })?;
        let entry = CatalogueEntry {
            rim_height_offset: row.rim_height_m.unwrap_or(0.0),
            ..CatalogueEntry::new(row.id, row.lat_deg, row.lon_deg, row.diameter_m)
        };
        entry.validate().map_err(|reason| LoadError::Validation {
            line,
            reason: reason.to_string(),
        })?;
        entries.push(entry);
    }
    Ok(entries)
}

pub fn load_catalogue(path: &Path) -> Result<Catalogue, LoadError> {
    let entries = read_catalogue_entries(BufReader::new(File::open(path)?))?;
    Catalogue::new(entries).map_err(|e| LoadError::Validation {
        line: 0,
        reason: e.to_string(),
    })
}

pub fn save_catalogue(path: &Path, entries: &[CatalogueEntry]) -> std::io::Result<()> {
    let with_heights = entries.iter().any(|e| e.rim_height_offset != 0.0);
    let mut w = csv_writer(path)?;
    for e in entries {
        w.serialize(CatalogueRow {
            id: e.id.clone(),
            lat_deg: e.latitude,
            lon_deg: e.longitude,
            diameter_m: e.diameter,
            rim_height_m: with_heights.then_some(e.rim_height_offset),
        })?;
    }
    flush(w)
}

// ---- frames ------------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct FrameRow {
    t_s: f64,
    qw: f64,
    qx: f64,
    qy: f64,
    qz: f64,
    x_m: f64,
    y_m: f64,
    z_m: f64,
    solar_deg: f64,
}

fn quaternion(r: &Rotation3<f64>) -> [f64; 4] {
    let q = UnitQuaternion::from_rotation_matrix(r);
    [q.w, q.i, q.j, q.k]
}

fn rotation(q: [f64; 4]) -> Rotation3<f64> {
    UnitQuaternion::from_quaternion(Quaternion::new(q[0], q[1], q[2], q[3])).to_rotation_matrix()
}

pub fn save_frames(path: &Path, frames: &[MissionFrame]) -> std::io::Result<()> {
    let mut w = csv_writer(path)?;
    for f in frames {
        let [qw, qx, qy, qz] = quaternion(&f.truth_pose.rotation);
        let p = f.truth_pose.position;
        w.serialize(FrameRow {
            t_s: f.timestamp,
            qw,
            qx,
            qy,
            qz,
            x_m: p.x,
            y_m: p.y,
            z_m: p.z,
            solar_deg: f.solar_angle,
        })?;
    }
    flush(w)
}

pub fn load_frames(path: &Path) -> Result<Vec<MissionFrame>, LoadError> {
    let mut rdr = csv_reader(BufReader::new(File::open(path)?));
    rdr.deserialize::<FrameRow>()
        .map(|row| {
            let r = row.map_err(LoadError::from_csv)?;
            Ok(MissionFrame {
                timestamp: r.t_s,
                truth_pose: Pose::new(rotation([r.qw, r.qx, r.qy, r.qz]), Vector3::new(r.x_m, r.y_m, r.z_m)),
                solar_angle: r.solar_deg,
            })
        })
        .collect()
}

// ---- detections --------------------------------------------------------

/// One detection in the flat detections-JSON array.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionRecord {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub a: f64,
    pub b: f64,
    pub theta: f64,
    pub conf: f64,
    #[serde(default)]
    pub gt_id: Option<String>,
}

pub fn detection_records(frames: &[FrameDetections]) -> Vec<DetectionRecord> {
    let mut out = Vec::new();
    for f in frames {
        for (k, d) in f.detections.iter().enumerate() {
            let e = &d.ellipse;
            out.push(DetectionRecord {
                t: f.timestamp,
                x: e.x,
                y: e.y,
                a: e.semi_major,
                b: e.semi_minor,
                theta: e.theta,
                conf: d.confidence,
                gt_id: f.ground_truth_ids.as_ref().map(|ids| ids[k].clone()),
            });
        }
    }
    out
}

/// Group records by timestamp, keyed by the timestamp's bits. Ground-truth
/// ids are kept only when every record of the frame has one.
pub fn group_detections(records: Vec<DetectionRecord>) -> BTreeMap<u64, FrameDetections> {
    let mut grouped: BTreeMap<u64, (FrameDetections, Vec<Option<String>>)> = BTreeMap::new();
    for r in records {
        let slot = grouped.entry(r.t.to_bits()).or_insert_with(|| {
            (
                FrameDetections {
                    timestamp: r.t,
                    ..FrameDetections::default()
                },
                Vec::new(),
            )
        });
        slot.0.detections.push(Detection {
            ellipse: EllipseParams::new(r.x, r.y, r.a, r.b, r.theta),
            confidence: r.conf,
        });
        slot.1.push(r.gt_id);
    }
    grouped
        .into_iter()
        .map(|(k, (mut f, ids))| {
            f.ground_truth_ids = ids.into_iter().collect();
            (k, f)
        })
        .collect()
}

pub fn save_detections(path: &Path, frames: &[FrameDetections]) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer(&mut w, &detection_records(frames))?;
    w.flush()
}

pub fn load_detections(path: &Path) -> Result<BTreeMap<u64, FrameDetections>, LoadError> {
    let records: Vec<DetectionRecord> =
        serde_json::from_reader(BufReader::new(File::open(path)?)).map_err(|e| LoadError::Parse {
            line: e.line() as u64,
            message: e.to_string(),
        })?;
    Ok(group_detections(records))
}

// ---- positions ---------------------------------------------------------

#[derive(Debug, Serialize, Deserialize)]
struct PositionRow {
    t_s: f64,
    x_m: f64,
    y_m: f64,
    z_m: f64,
}

pub fn save_positions(path: &Path, positions: &[TimedPosition]) -> std::io::Result<()> {
    let mut w = csv_writer(path)?;
    for p in positions {
        w.serialize(PositionRow {
            t_s: p.timestamp,
            x_m: p.position.x,
            y_m: p.position.y,
            z_m: p.position.z,
        })?;
    }
    flush(w)
}

pub fn load_positions(path: &Path) -> Result<Vec<TimedPosition>, LoadError> {
    let mut rdr = csv_reader(BufReader::new(File::open(path)?));
    rdr.deserialize::<PositionRow>()
        .map(|row| {
            let r = row.map_err(LoadError::from_csv)?;
            Ok(TimedPosition::new(r.t_s, Vector3::new(r.x_m, r.y_m, r.z_m)))
        })
        .collect()
}

// ---- reports -----------------------------------------------------------

#[derive(Debug, Default, Serialize, Deserialize)]
struct ReportRow {
    t_s: f64,
    status: String,
    detections: usize,
    correspondences: usize,
    inliers: usize,
    est_qw: Option<f64>,
    est_qx: Option<f64>,
    est_qy: Option<f64>,
    est_qz: Option<f64>,
    est_x_m: Option<f64>,
    est_y_m: Option<f64>,
    est_z_m: Option<f64>,
    truth_qw: f64,
    truth_qx: f64,
    truth_qy: f64,
    truth_qz: f64,
    truth_x_m: f64,
    truth_y_m: f64,
    truth_z_m: f64,
    prior_qw: f64,
    prior_qx: f64,
    prior_qy: f64,
    prior_qz: f64,
    prior_x_m: f64,
    prior_y_m: f64,
    prior_z_m: f64,
    position_error_m: Option<f64>,
    angular_error_deg: Option<f64>,
    surface_error_m: Option<f64>,
    solar_deg: f64,
}

fn pose_fields(p: &Pose) -> ([f64; 4], [f64; 3]) {
    (quaternion(&p.rotation), [p.position.x, p.position.y, p.position.z])
}

fn pose_from(q: [f64; 4], t: [f64; 3]) -> Pose {
    Pose::new(rotation(q), Vector3::from(t))
}

impl ReportRow {
    fn from_report(r: &FrameReport) -> Self {
        let (tq, tt) = pose_fields(&r.truth);
        let (pq, pt) = pose_fields(&r.prior);
        let mut row = ReportRow {
            t_s: r.timestamp,
            status: r.status.as_str().to_string(),
            detections: r.detections,
            correspondences: r.correspondences,
            inliers: r.inlier_count,
            truth_qw: tq[0],
            truth_qx: tq[1],
            truth_qy: tq[2],
            truth_qz: tq[3],
            truth_x_m: tt[0],
            truth_y_m: tt[1],
            truth_z_m: tt[2],
            prior_qw: pq[0],
            prior_qx: pq[1],
            prior_qy: pq[2],
            prior_qz: pq[3],
            prior_x_m: pt[0],
            prior_y_m: pt[1],
            prior_z_m: pt[2],
            position_error_m: r.errors.map(|e| e.position),
            angular_error_deg: r.errors.map(|e| e.angular),
            surface_error_m: r.errors.map(|e| e.observed_surface),
            solar_deg: r.solar_angle,
            ..Default::default()
        };
        if let Some(p) = &r.pose_estimate {
            let (q, t) = pose_fields(p);
            (row.est_qw, row.est_qx, row.est_qy, row.est_qz) = (Some(q[0]), Some(q[1]), Some(q[2]), Some(q[3]));
            (row.est_x_m, row.est_y_m, row.est_z_m) = (Some(t[0]), Some(t[1]), Some(t[2]));
        }
        row
    }

    fn into_report(self, line: u64) -> Result<FrameReport, LoadError> {
        let status = FrameStatus::parse(&self.status).ok_or_else(|| LoadError::Parse {
            line,
            message: format!("unknown status `{}`", self.status),
        })?;
        let estimate = match (self.est_qw, self.est_qx, self.est_qy, self.est_qz, self.est_x_m, self.est_y_m, self.est_z_m) {
            (Some(w), Some(x), Some(y), Some(z), Some(px), Some(py), Some(pz)) => {
                Some(pose_from([w, x, y, z], [px, py, pz]))
            }
            (None, None, None, None, None, None, None) => None,
            _ => {
                return Err(LoadError::Parse {
                    line,
                    message: "partial pose estimate".into(),
                })
            }
        };
        let errors = match (self.position_error_m, self.angular_error_deg, self.surface_error_m) {
            (Some(position), Some(angular), Some(observed_surface)) => Some(FrameErrors {
                position,
                angular,
                observed_surface,
            }),
            _ => None,
        };
        if errors.is_some() != (status == FrameStatus::Ok) {
            return Err(LoadError::Validation {
                line,
                reason: "errors must be present exactly for OK frames".into(),
            });
        }
        Ok(FrameReport {
            timestamp: self.t_s,
            status,
            pose_estimate: estimate,
            truth: pose_from(
                [self.truth_qw, self.truth_qx, self.truth_qy, self.truth_qz],
                [self.truth_x_m, self.truth_y_m, self.truth_z_m],
            ),
            prior: pose_from(
                [self.prior_qw, self.prior_qx, self.prior_qy, self.prior_qz],
                [self.prior_x_m, self.prior_y_m, self.prior_z_m],
            ),
            detections: self.detections,
            correspondences: self.correspondences,
            inlier_count: self.inliers,
            errors,
            solar_angle: self.solar_deg,
            runtime: 0.0,
        })
    }
}

/// Frame reports without runtimes, so identical runs give identical files.
pub fn save_reports(path: &Path, reports: &[FrameReport]) -> std::io::Result<()> {
    let mut w = csv_writer(path)?;
    for r in reports {
        w.serialize(ReportRow::from_report(r))?;
    }
    flush(w)
}

pub fn load_reports(path: &Path) -> Result<Vec<FrameReport>, LoadError> {
    let mut rdr = csv_reader(BufReader::new(File::open(path)?));
    let mut out = Vec::new();
    for row in rdr.deserialize::<ReportRow>() {
        let row = row.map_err(LoadError::from_csv)?;
        out.push(row.into_report(out.len() as u64 + 2)?);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
struct TimingRow {
    t_s: f64,
    runtime_s: f64,
}

pub fn save_timings(path: &Path, reports: &[FrameReport]) -> std::io::Result<()> {
    let mut w = csv_writer(path)?;
    for r in reports {
        w.serialize(TimingRow {
            t_s: r.timestamp,
            runtime_s: r.runtime,
        })?;
    }
    flush(w)
}

#[derive(Debug, Serialize)]
struct BinRow {
    lo_deg: f64,
    hi_deg: f64,
    frames: usize,
    ok: usize,
    mean_position_error_m: Option<f64>,
    median_position_error_m: Option<f64>,
    mean_surface_error_m: Option<f64>,
    median_surface_error_m: Option<f64>,
    mean_inliers: Option<f64>,
}

pub fn save_bins(path: &Path, bins: &[Bin]) -> std::io::Result<()> {
    let mut w = csv_writer(path)?;
    for b in bins {
        w.serialize(BinRow {
            lo_deg: b.lo,
            hi_deg: b.hi,
            frames: b.frames,
            ok: b.ok,
            mean_position_error_m: b.position_error.map(|s| s.mean),
            median_position_error_m: b.position_error.map(|s| s.median),
            mean_surface_error_m: b.observed_surface_error.map(|s| s.mean),
            median_surface_error_m: b.observed_surface_error.map(|s| s.median),
            mean_inliers: b.mean_inliers,
        })?;
    }
    flush(w)
}

pub fn save_json<T: Serialize>(path: &Path, value: &T) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()
}
