//! Batch execution: parallel per-frame core, orbit refinement and run
//! directories.

use std::collections::BTreeMap;
use std::fs;
use std::io::ErrorKind;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::Context;
use crater_nav_core::catalogue::synth::generate;
use crater_nav_core::catalogue::Catalogue;
use crater_nav_core::detector::{simulate_detections, FrameDetections, NoiseConfig};
use crater_nav_core::mission::{MissionFrame, SunModel};
use crater_nav_core::od::OdError;
use crater_nav_core::pipeline::{frame_seed, run_core, run_od, summarize, FrameInput, FrameReport, OdOutput, Summary};
use crater_nav_core::MU_MOON_KM3_S2;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::RunConfig;
use crate::io;

pub fn catalogue_for(cfg: &RunConfig) -> anyhow::Result<Catalogue> {
    match &cfg.catalogue_path {
        Some(p) => io::load_catalogue(p).with_context(|| format!("loading {}", p.display())),
        None => Ok(generate(&cfg.synth)),
    }
}

/// Pipeline inputs for scheduled frames. With `detections` given, frames
/// it does not mention get an empty detection list.
pub fn frame_inputs(
    frames: &[MissionFrame],
    sun: &SunModel,
    detections: Option<&BTreeMap<u64, FrameDetections>>,
) -> Vec<FrameInput> {
    frames
        .iter()
        .map(|f| FrameInput {
            timestamp: f.timestamp,
            truth: f.truth_pose,
            sun_direction: sun.direction(f.timestamp),
            solar_angle: f.solar_angle,
            detections: detections.map(|d| {
                d.get(&f.timestamp.to_bits()).cloned().unwrap_or_else(|| FrameDetections {
                    timestamp: f.timestamp,
                    ..FrameDetections::default()
                })
            }),
        })
        .collect()
}

/// Simulated detections with the same per-frame seeds `run_core` uses.
pub fn simulate_batch(frames: &[MissionFrame], cat: &Catalogue, cfg: &RunConfig) -> Vec<FrameDetections> {
    let core = cfg.core_config();
    frames
        .par_iter()
        .map(|f| {
            let noise = NoiseConfig {
                seed: frame_seed(core.seed, f.timestamp),
                ..core.noise
            };
            let sun = cfg.mission.sun.direction(f.timestamp);
            let mut d = simulate_detections(&f.truth_pose, cat, &core.camera, &noise, core.image_size, &sun);
            d.timestamp = f.timestamp;
            d
        })
        .collect()
}

/// Run the core on every frame in parallel; output order follows input.
pub fn run_frames(inputs: &[FrameInput], cat: &Catalogue, cfg: &RunConfig) -> Vec<FrameReport> {
    let core = cfg.core_config();
    inputs
        .par_iter()
        .map(|input| {
            let start = Instant::now();
            let mut r = run_core(input, cat, &core);
            r.runtime = start.elapsed().as_secs_f64();
            r
        })
        .collect()
}

/// Orbit refinement of a batch, positions for every report timestamp.
pub fn refine(reports: &[FrameReport], cfg: &RunConfig) -> Result<OdOutput, OdError> {
    let times: Vec<f64> = reports.iter().map(|r| r.timestamp).collect();
    let sun = cfg.mission.sun;
    run_od(reports, &times, MU_MOON_KM3_S2, cfg.od_window_s, |t| sun.inertial_to_world(t))
}

/// How the priors were drawn, recorded next to the statistics.
#[derive(Debug, Clone, Serialize)]
pub struct PriorModel {
    pub position: &'static str,
    pub attitude: &'static str,
    pub pos_bound_m: f64,
    pub att_bound_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SummaryDocument {
    pub config_hash: String,
    pub seed: u64,
    pub min_inliers: usize,
    pub prior: PriorModel,
    pub summary: Summary,
}

pub fn summary_document(
    reports: &[FrameReport],
    refined: Option<&[crater_nav_core::od::TimedPosition]>,
    cfg: &RunConfig,
) -> SummaryDocument {
    SummaryDocument {
        config_hash: cfg.hash(),
        seed: cfg.seed,
        min_inliers: cfg.min_inliers,
        prior: PriorModel {
            position: "each component uniform in [-pos_bound, pos_bound]",
            attitude: "roll, pitch, yaw about the camera axes, each uniform in [-att_bound, att_bound]",
            pos_bound_m: cfg.prior_pos_sigma,
            att_bound_deg: cfg.prior_att_sigma,
        },
        summary: summarize(reports, refined),
    }
}

/// Write the summary JSON and the two bin tables into `dir`.
pub fn write_summary(dir: &Path, doc: &SummaryDocument) -> std::io::Result<()> {
    io::save_json(&dir.join("summary.json"), doc)?;
    io::save_bins(&dir.join("solar_angle_bins.csv"), &doc.summary.solar_angle_bins)?;
    io::save_bins(&dir.join("off_nadir_bins.csv"), &doc.summary.off_nadir_bins)
}

/// Fresh directory `<root>/<config hash>/<NNN>`; earlier runs are never
/// touched.
pub fn create_run_dir(root: &Path, cfg: &RunConfig) -> std::io::Result<PathBuf> {
    let base = root.join(cfg.hash());
    fs::create_dir_all(&base)?;
    for n in 1.. {
        let dir = base.join(format!("{n:03}"));
        match fs::create_dir(&dir) {
            Ok(()) => {
                fs::write(dir.join("config.toml"), cfg.to_toml())?;
                return Ok(dir);
            }
            Err(e) if e.kind() == ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(e),
        }
    }
    unreachable!()
}

/// Reports and timings of a core run.
pub fn write_core_outputs(dir: &Path, reports: &[FrameReport]) -> std::io::Result<()> {
    io::save_reports(&dir.join("reports.csv"), reports)?;
    io::save_timings(&dir.join("timings.csv"), reports)
}
