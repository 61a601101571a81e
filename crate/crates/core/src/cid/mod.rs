//! Descriptor-less crater identification by camera-position search.
//!
//! With the attitude fixed at the prior, every (detection, catalogue crater)
//! hypothesis yields a candidate camera position through a single-ellipse
//! fit. Each candidate is scored by how many detections some catalogued
//! crater reprojects onto within `ε`; the best position defines the
//! correspondence set.

mod p1e;

pub use p1e::p1e_position;

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::f64::consts::{FRAC_PI_2, PI};

use nalgebra::{Rotation3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalogue::Catalogue;
use crate::detector::FrameDetections;
use crate::geometry::{project_crater, CameraIntrinsics, CraterDisc, EllipseParams, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum CidError {
    #[error("frame has no detections")]
    NoDetections,
    #[error("single-ellipse position fit did not converge")]
    NoConvergence,
    #[error("no camera position explains enough detections")]
    NoResult,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CidConfig {
    /// Ellipse-distance match threshold.
    pub epsilon: f64,
    /// Early exit once more than this fraction of detections match.
    pub termination_fraction: f64,
    /// Radius of the prior position ball, metres.
    pub pos_uncertainty: f64,
    /// Prior attitude uncertainty, degrees.
    pub att_uncertainty_deg: f64,
    pub max_hypotheses: usize,
}

impl Default for CidConfig {
    fn default() -> Self {
        Self {
            epsilon: 20.0,
            termination_fraction: 0.6,
            pos_uncertainty: 11_000.0,
            att_uncertainty_deg: 0.02,
            max_hypotheses: 20_000,
        }
    }
}

impl CidConfig {
    pub fn is_valid(&self) -> bool {
        self.epsilon > 0.0
            && self.termination_fraction > 0.0
            && self.termination_fraction <= 1.0
            && self.pos_uncertainty > 0.0
            && self.att_uncertainty_deg > 0.0
    }
}

/// Matched `(detection index, catalogue index)` pairs and the camera position
/// they were matched at.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrespondenceSet {
    pub pairs: Vec<(usize, usize)>,
    pub position_estimate: Vector3<f64>,
    /// Number of detections with a catalogue crater within `ε` at
    /// `position_estimate`; at least `pairs.len()`.
    pub score: usize,
    pub hypotheses_tried: usize,
}

impl CorrespondenceSet {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// `(Δx, Δy, Δâ, Δb̂, Δθ)` between a detection and a predicted ellipse.
///
/// `Δθ` is wrapped to `(−π/2, π/2]` and dropped when the detection is nearly
/// circular (`b̂/â > 0.95`), where its orientation carries no information.
pub fn ellipse_residual_vector(d: &EllipseParams, e: &EllipseParams) -> [f64; 5] {
    let dtheta = if d.semi_minor > 0.95 * d.semi_major {
        0.0
    } else {
        wrap_half_pi(d.theta - e.theta)
    };
    [
        d.x - e.x,
        d.y - e.y,
        d.semi_major - e.semi_major,
        d.semi_minor - e.semi_minor,
        dtheta,
    ]
}

/// L2 norm of [`ellipse_residual_vector`].
pub fn ellipse_residual(d: &EllipseParams, e: &EllipseParams) -> f64 {
    ellipse_residual_vector(d, e)
        .iter()
        .map(|v| v * v)
        .sum::<f64>()
        .sqrt()
}

fn wrap_half_pi(a: f64) -> f64 {
    let w = a - PI * (a / PI).round();
    if w <= -FRAC_PI_2 {
        w + PI
    } else {
        w
    }
}

/// Distance between detection `d` and crater `c` projected at `pose`; `+∞`
/// when the projection is degenerate.
pub fn ellipse_distance(
    d: &EllipseParams,
    c: &CraterDisc,
    pose: &Pose,
    cam: &CameraIntrinsics,
) -> f64 {
    match project_crater(c, pose, cam) {
        Ok(e) => ellipse_residual(d, &e),
        Err(_) => f64::INFINITY,
    }
}

fn project_all(subcat: &Catalogue, pose: &Pose, cam: &CameraIntrinsics) -> Vec<Option<EllipseParams>> {
    subcat
        .discs()
        .iter()
        .map(|c| project_crater(c, pose, cam).ok())
        .collect()
}

/// Best catalogue crater and its distance for one detection.
fn best_match(d: &EllipseParams, projected: &[Option<EllipseParams>]) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (j, e) in projected.iter().enumerate() {
        if let Some(e) = e {
            let r = ellipse_residual(d, e);
            if best.is_none_or(|(_, b)| r < b) {
                best = Some((j, r));
            }
        }
    }
    best
}

/// Number of detections whose best catalogue crater lies within `eps` when
/// the camera sits at `t` with the given attitude.
pub fn score_position(
    t: &Vector3<f64>,
    frame: &FrameDetections,
    subcat: &Catalogue,
    attitude: &Rotation3<f64>,
    cam: &CameraIntrinsics,
    eps: f64,
) -> usize {
    let projected = project_all(subcat, &Pose::new(*attitude, *t), cam);
    score_projected(frame, &projected, eps)
}

fn score_projected(frame: &FrameDetections, projected: &[Option<EllipseParams>], eps: f64) -> usize {
    frame
        .ellipses()
        .filter(|d| best_match(d, projected).is_some_and(|(_, r)| r <= eps))
        .count()
}

/// Hypothesis pairs `(i, j)` whose predicted-to-observed semi-major ratio at
/// the prior lies in `[0.5, 2]`, most compatible first.
pub fn hypothesis_order(
    frame: &FrameDetections,
    subcat: &Catalogue,
    prior: &Pose,
    cam: &CameraIntrinsics,
) -> Vec<(usize, usize)> {
    let predicted = project_all(subcat, prior, cam);
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for (i, d) in frame.ellipses().enumerate() {
        for (j, e) in predicted.iter().enumerate() {
            let Some(e) = e else { continue };
            let ratio = e.semi_major / d.semi_major;
            if (0.5..=2.0).contains(&ratio) {
                pairs.push((ratio.ln().abs(), i, j));
            }
        }
    }
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    pairs.into_iter().map(|(_, i, j)| (i, j)).collect()
}

/// Identify detected craters against the sub-catalogue.
pub fn pecan_match(
    frame: &FrameDetections,
    subcat: &Catalogue,
    prior: &Pose,
    cam: &CameraIntrinsics,
    cfg: &CidConfig,
) -> Result<CorrespondenceSet, CidError> {
    let search = pecan_search(frame, subcat, prior, cam, cfg)?;
    let Some((score, t)) = search.best else {
        return Err(CidError::NoResult);
    };
    if !passes(score, frame.len(), cfg.termination_fraction) {
        return Err(CidError::NoResult);
    }
    Ok(correspondences_at(frame, subcat, &prior.rotation, &t, cam, cfg.epsilon, search.tried))
}

/// Outcome of the hypothesis loop before the termination test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SearchOutcome {
    /// Best score and the first position reaching it.
    pub best: Option<(usize, Vector3<f64>)>,
    pub tried: usize,
}

fn passes(score: usize, n: usize, fraction: f64) -> bool {
    score as f64 > fraction * n as f64 || score == n
}

/// The PECAN hypothesis loop: ordered pairs, γ-ball rejection and the
/// early exit once the score clears `termination_fraction`.
pub fn pecan_search(
    frame: &FrameDetections,
    subcat: &Catalogue,
    prior: &Pose,
    cam: &CameraIntrinsics,
    cfg: &CidConfig,
) -> Result<SearchOutcome, CidError> {
    let n = frame.len();
    if n == 0 {
        return Err(CidError::NoDetections);
    }
    let attitude = prior.rotation;
    let mut best: Option<(usize, Vector3<f64>)> = None;
    let mut tried = 0;
    for (i, j) in hypothesis_order(frame, subcat, prior, cam) {
        if tried >= cfg.max_hypotheses {
            break;
        }
        tried += 1;
        let d = &frame.detections[i].ellipse;
        let Ok(t) = p1e_position(d, &subcat.discs()[j], &attitude, cam, cfg.epsilon) else {
            continue;
        };
        if (t - prior.position).norm() > cfg.pos_uncertainty {
            continue;
        }
        let score = score_position(&t, frame, subcat, &attitude, cam, cfg.epsilon);
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, t));
        }
        if passes(score, n, cfg.termination_fraction) {
            break;
        }
    }
    Ok(SearchOutcome { best, tried })
}

/// Reference search: every (detection, crater) pair, no ordering, no early
/// exit. Returns the best score and the first position reaching it.
///
/// Cost is `O(n·m)` P1E solves each followed by a full scoring pass, so it
/// is only meant for checking [`pecan_match`] on small frames.
pub fn exhaustive_best(
    frame: &FrameDetections,
    subcat: &Catalogue,
    prior: &Pose,
    cam: &CameraIntrinsics,
    cfg: &CidConfig,
) -> Option<(usize, Vector3<f64>)> {
    let attitude = prior.rotation;
    let mut best: Option<(usize, Vector3<f64>)> = None;
    for d in frame.ellipses() {
        for c in subcat.discs() {
            let Ok(t) = p1e_position(d, c, &attitude, cam, cfg.epsilon) else {
                continue;
            };
            if (t - prior.position).norm() > cfg.pos_uncertainty {
                continue;
            }
            let score = score_position(&t, frame, subcat, &attitude, cam, cfg.epsilon);
            if best.is_none_or(|(s, _)| score > s) {
                best = Some((score, t));
            }
        }
    }
    best
}

/// Lowest-residual catalogue crater per detection, kept when within `eps`.
///
/// A catalogue crater claimed by several detections stays with the one it
/// fits best; the others are dropped. `score` still counts every detection
/// with a match, so it equals [`score_position`] at `t`.
pub fn correspondences_at(
    frame: &FrameDetections,
    subcat: &Catalogue,
    attitude: &Rotation3<f64>,
    t: &Vector3<f64>,
    cam: &CameraIntrinsics,
    eps: f64,
    hypotheses_tried: usize,
) -> CorrespondenceSet {
    let projected = project_all(subcat, &Pose::new(*attitude, *t), cam);
    let matches: Vec<(usize, usize, f64)> = frame
        .ellipses()
        .enumerate()
        .filter_map(|(i, d)| {
            best_match(d, &projected)
                .filter(|&(_, r)| r <= eps)
                .map(|(j, r)| (i, j, r))
        })
        .collect();
    let mut owner: BTreeMap<usize, (f64, usize)> = BTreeMap::new();
    for &(i, j, r) in &matches {
        let slot = owner.entry(j).or_insert((r, i));
        if r < slot.0 {
            *slot = (r, i);
        }
    }
    let pairs = matches
        .iter()
        .filter(|&&(i, j, _)| owner[&j].1 == i)
        .map(|&(i, j, _)| (i, j))
        .collect();
    CorrespondenceSet {
        score: matches.len(),
        pairs,
        position_estimate: *t,
        hypotheses_tried,
    }
}
