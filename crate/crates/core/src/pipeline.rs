//! Per-frame orchestration (detect, identify, refine, gate), orbit
//! refinement of a batch, and summary statistics.

use alloc::vec::Vec;

use nalgebra::{Rotation3, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::catalogue::{visibility_subcatalogue, Catalogue, VisibilityQuery};
use crate::cbpe::{gate_result, pnc_solve, PncConfig, PncError};
use crate::cid::{correspondences_at, pecan_match, CidConfig};
use crate::detector::{simulate_detections, FrameDetections, NoiseConfig};
use crate::geometry::{angular_error, surface_intersection, CameraIntrinsics, Pose};
use crate::od::{fit_orbit, OdError, OrbitFit, TimedPosition};
use crate::MOON_RADIUS_M;

/// Slack on the circumscribing radius of the componentwise prior box.
const BOX_SLACK: f64 = 1.001;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CoreConfig {
    pub camera: CameraIntrinsics,
    /// Image width and height, pixels.
    pub image_size: [f64; 2],
    /// Detection noise profile; its seed is replaced per frame.
    pub noise: NoiseConfig,
    pub cid: CidConfig,
    pub pnc: PncConfig,
    /// 0 for the plain core, 6 for the gated variant.
    pub min_inliers: usize,
    /// Componentwise bound of the prior position perturbation, metres.
    pub prior_pos_sigma: f64,
    /// Bound of each Euler-angle perturbation of the prior, degrees.
    pub prior_att_sigma: f64,
    /// Times the correspondences are re-identified at the refined pose and
    /// the pose refined again.
    pub reassociation_passes: usize,
    pub seed: u64,
}

impl Default for CoreConfig {
    fn default() -> Self {
        Self {
            camera: CameraIntrinsics {
                focal_length: 1200.0,
                principal_point: [512.0, 512.0],
            },
            image_size: [1024.0, 1024.0],
            noise: NoiseConfig::default(),
            cid: CidConfig::default(),
            pnc: PncConfig::default(),
            min_inliers: 0,
            prior_pos_sigma: 11_000.0,
            prior_att_sigma: 0.02,
            reassociation_passes: 1,
            seed: 0,
        }
    }
}

impl CoreConfig {
    pub fn is_valid(&self) -> bool {
        self.camera.validate().is_ok()
            && self.image_size.iter().all(|s| *s > 0.0 && s.is_finite())
            && self.noise.is_valid()
            && self.cid.is_valid()
            && self.pnc.is_valid()
            && self.prior_pos_sigma >= 0.0
            && self.prior_att_sigma >= 0.0
    }

    /// Radius of the ball that holds every prior position offset.
    pub fn position_bound(&self) -> f64 {
        3f64.sqrt() * self.prior_pos_sigma * BOX_SLACK
    }

    /// Geodesic bound on the prior attitude error, degrees.
    pub fn attitude_bound(&self) -> f64 {
        3f64.sqrt() * self.prior_att_sigma * BOX_SLACK
    }
}

/// Per-frame seed derived from the run seed and the frame timestamp.
pub fn frame_seed(seed: u64, timestamp: f64) -> u64 {
    splitmix(seed ^ splitmix(timestamp.to_bits()))
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Perturbed prior: each position component uniform in `±pos_sigma`, and
/// the attitude turned by roll, pitch and yaw each uniform in `±att_sigma`
/// degrees about the camera axes.
pub fn init_prior(truth: &Pose, pos_sigma: f64, att_sigma: f64, seed: u64) -> Pose {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut sym = |bound: f64| (2.0 * rng.random::<f64>() - 1.0) * bound;
    let dt = Vector3::new(sym(pos_sigma), sym(pos_sigma), sym(pos_sigma));
    let d = att_sigma.to_radians();
    let (roll, pitch, yaw) = (sym(d), sym(d), sym(d));
    let mut rot = truth.rotation * Rotation3::from_euler_angles(roll, pitch, yaw);
    if att_sigma > 0.0 {
        rot.renormalize();
    }
    Pose::new(rot, truth.position + dt)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FrameStatus {
    #[serde(rename = "OK")]
    Ok,
    #[serde(rename = "NoResultCDA")]
    NoResultCda,
    #[serde(rename = "NoResultCID")]
    NoResultCid,
    #[serde(rename = "NoResultGate")]
    NoResultGate,
}

impl FrameStatus {
    pub const ALL: [FrameStatus; 4] = [Self::Ok, Self::NoResultCda, Self::NoResultCid, Self::NoResultGate];

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::Ok => "OK",
            Self::NoResultCda => "NoResultCDA",
            Self::NoResultCid => "NoResultCID",
            Self::NoResultGate => "NoResultGate",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|v| v.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrameErrors {
    /// Metres.
    pub position: f64,
    /// Degrees.
    pub angular: f64,
    /// Distance between the boresight surface points, metres; infinite when
    /// the estimated boresight misses the Moon.
    pub observed_surface: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameInput {
    pub timestamp: f64,
    pub truth: Pose,
    pub sun_direction: Vector3<f64>,
    pub solar_angle: f64,
    /// External detections; simulated from the truth pose when absent.
    pub detections: Option<FrameDetections>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrameReport {
    pub timestamp: f64,
    pub status: FrameStatus,
    pub pose_estimate: Option<Pose>,
    pub truth: Pose,
    pub prior: Pose,
    pub detections: usize,
    pub correspondences: usize,
    pub inlier_count: usize,
    /// Present iff the status is OK.
    pub errors: Option<FrameErrors>,
    pub solar_angle: f64,
    /// Wall-clock seconds, filled in by the caller.
    pub runtime: f64,
}

impl FrameReport {
    /// Boresight angle from nadir at the truth pose, degrees.
    pub fn off_nadir(&self) -> f64 {
        self.truth.boresight().angle(&-self.truth.position).to_degrees()
    }
}

pub fn frame_errors(estimate: &Pose, truth: &Pose, cam: &CameraIntrinsics) -> FrameErrors {
    let surface = match (
        surface_intersection(estimate, cam, MOON_RADIUS_M),
        surface_intersection(truth, cam, MOON_RADIUS_M),
    ) {
        (Ok(a), Ok(b)) => (a - b).norm(),
        _ => f64::INFINITY,
    };
    FrameErrors {
        position: (estimate.position - truth.position).norm(),
        angular: angular_error(&estimate.rotation, &truth.rotation),
        observed_surface: surface,
    }
}

/// Detection, identification, pose refinement and gating for one frame.
///
/// The prior is drawn from the truth with [`init_prior`]. Identification
/// searches the ball that circumscribes the prior box, and its position is
/// adopted as the refinement prior when it lies inside that ball. The
/// refinement attitude bound is widened the same way. The correspondences
/// are then re-identified at the refined pose and the pose refined again
/// from the same prior, `reassociation_passes` times. Failures become
/// statuses: too few correspondences count against identification, a
/// degenerate refinement against the gate.
pub fn run_core(input: &FrameInput, cat: &Catalogue, cfg: &CoreConfig) -> FrameReport {
    let seed = frame_seed(cfg.seed, input.timestamp);
    let prior = init_prior(&input.truth, cfg.prior_pos_sigma, cfg.prior_att_sigma, seed);
    let frame = match &input.detections {
        Some(d) => d.clone(),
        None => {
            let noise = NoiseConfig { seed, ..cfg.noise };
            let mut f = simulate_detections(&input.truth, cat, &cfg.camera, &noise, cfg.image_size, &input.sun_direction);
            f.timestamp = input.timestamp;
            f
        }
    };
    let mut report = FrameReport {
        timestamp: input.timestamp,
        status: FrameStatus::NoResultCda,
        pose_estimate: None,
        truth: input.truth,
        prior,
        detections: frame.len(),
        correspondences: 0,
        inlier_count: 0,
        errors: None,
        solar_angle: input.solar_angle,
        runtime: 0.0,
    };
    if frame.is_empty() {
        return report;
    }

    report.status = FrameStatus::NoResultCid;
    let pos_bound = cfg.position_bound();
    let cid = CidConfig {
        pos_uncertainty: cfg.cid.pos_uncertainty.max(pos_bound),
        att_uncertainty_deg: cfg.cid.att_uncertainty_deg.max(cfg.attitude_bound()),
        ..cfg.cid
    };
    let query = VisibilityQuery {
        pos_uncertainty: cid.pos_uncertainty,
        att_uncertainty_deg: cid.att_uncertainty_deg,
        image_size: cfg.image_size,
        // room for semi-axis noise around the detector's size cut
        min_semi_minor: 0.5 * cfg.noise.min_semi_minor,
    };
    let Ok(sub) = visibility_subcatalogue(cat, &prior, &query, &cfg.camera) else {
        return report;
    };
    let Ok(corr) = pecan_match(&frame, &sub, &prior, &cfg.camera, &cid) else {
        return report;
    };
    report.correspondences = corr.len();

    let start = if (corr.position_estimate - prior.position).norm() <= pos_bound.max(cfg.pnc.gamma) {
        corr.position_estimate
    } else {
        prior.position
    };
    let pnc = PncConfig {
        delta_deg: cfg.pnc.delta_deg.max(cfg.attitude_bound()),
        ..cfg.pnc
    };
    let pnc_prior = Pose::new(prior.rotation, start);
    let mut res = match pnc_solve(&frame, &corr, &sub, &pnc_prior, &cfg.camera, &pnc) {
        Ok(r) => r,
        Err(PncError::InsufficientCorrespondences) => return report,
        Err(PncError::Degenerate) => {
            report.status = FrameStatus::NoResultGate;
            return report;
        }
    };
    for _ in 0..cfg.reassociation_passes {
        let at = res.pose;
        let again = correspondences_at(&frame, &sub, &at.rotation, &at.position, &cfg.camera, cid.epsilon, 0);
        let Ok(next) = pnc_solve(&frame, &again, &sub, &pnc_prior, &cfg.camera, &pnc) else {
            break;
        };
        report.correspondences = again.len();
        res = next;
    }
    report.inlier_count = res.inlier_count;
    match gate_result(&res, cfg.min_inliers) {
        Some(pose) => {
            report.status = FrameStatus::Ok;
            report.errors = Some(frame_errors(&pose, &input.truth, &cfg.camera));
            report.pose_estimate = Some(pose);
        }
        None => report.status = FrameStatus::NoResultGate,
    }
    report
}

/// Orbit fits of a batch and the refined position at every requested time.
#[derive(Debug, Clone, PartialEq)]
pub struct OdOutput {
    pub fits: Vec<OrbitFit>,
    pub positions: Vec<TimedPosition>,
}

/// Fit one orbit through the OK position estimates and propagate it to
/// every time in `all_times`, failed frames included.
///
/// `to_world(t)` rotates inertial vectors into the world frame at `t`; the
/// fit runs in the inertial frame and the refined positions come back in
/// the world frame. With `window` set, times are split into consecutive
/// spans of that many seconds from the earliest time, each with its own fit.
pub fn run_od<F>(
    reports: &[FrameReport],
    all_times: &[f64],
    mu: f64,
    window: Option<f64>,
    to_world: F,
) -> Result<OdOutput, OdError>
where
    F: Fn(f64) -> Rotation3<f64>,
{
    let obs: Vec<TimedPosition> = reports
        .iter()
        .filter_map(|r| {
            r.pose_estimate
                .map(|p| TimedPosition::new(r.timestamp, to_world(r.timestamp).inverse() * p.position))
        })
        .collect();
    let back = |mut p: TimedPosition| {
        p.position = to_world(p.timestamp) * p.position;
        p
    };
    let Some(w) = window.filter(|w| *w > 0.0) else {
        let fit = fit_orbit(&obs, mu)?;
        let positions = fit.positions_at(all_times, mu)?.into_iter().map(back).collect();
        return Ok(OdOutput {
            fits: alloc::vec![fit],
            positions,
        });
    };
    let t0 = all_times
        .iter()
        .chain(obs.iter().map(|o| &o.timestamp))
        .fold(f64::INFINITY, |a, &b| a.min(b));
    let slot = |t: f64| ((t - t0) / w).floor() as i64;
    let mut fits: Vec<(i64, OrbitFit)> = Vec::new();
    let mut positions = Vec::with_capacity(all_times.len());
    for &t in all_times {
        let k = slot(t);
        let idx = match fits.iter().position(|(s, _)| *s == k) {
            Some(i) => i,
            None => {
                let inside: Vec<TimedPosition> = obs.iter().filter(|o| slot(o.timestamp) == k).copied().collect();
                fits.push((k, fit_orbit(&inside, mu)?));
                fits.len() - 1
            }
        };
        positions.extend(fits[idx].1.positions_at(&[t], mu)?.into_iter().map(back));
    }
    Ok(OdOutput {
        fits: fits.into_iter().map(|(_, f)| f).collect(),
        positions,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Stats {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    /// Population standard deviation.
    pub std: f64,
    pub rms: f64,
}

impl Stats {
    /// Statistics of the finite values, `None` when there are none.
    pub fn of(values: impl IntoIterator<Item = f64>) -> Option<Self> {
        let mut v: Vec<f64> = values.into_iter().filter(|x| x.is_finite()).collect();
        if v.is_empty() {
            return None;
        }
        v.sort_by(f64::total_cmp);
        let n = v.len() as f64;
        let mean = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n;
        let mid = v.len() / 2;
        let median = if v.len() % 2 == 1 {
            v[mid]
        } else {
            0.5 * (v[mid - 1] + v[mid])
        };
        Some(Self {
            count: v.len(),
            mean,
            median,
            std: var.sqrt(),
            rms: (v.iter().map(|x| x * x).sum::<f64>() / n).sqrt(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct StatusCounts {
    pub ok: usize,
    pub no_result_cda: usize,
    pub no_result_cid: usize,
    pub no_result_gate: usize,
}

impl StatusCounts {
    pub fn add(&mut self, s: FrameStatus) {
        match s {
            FrameStatus::Ok => self.ok += 1,
            FrameStatus::NoResultCda => self.no_result_cda += 1,
            FrameStatus::NoResultCid => self.no_result_cid += 1,
            FrameStatus::NoResultGate => self.no_result_gate += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.ok + self.no_result_cda + self.no_result_cid + self.no_result_gate
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Bin {
    /// Lower edge, inclusive, degrees.
    pub lo: f64,
    /// Upper edge, exclusive except for the last bin, degrees.
    pub hi: f64,
    pub frames: usize,
    pub ok: usize,
    pub position_error: Option<Stats>,
    pub observed_surface_error: Option<Stats>,
    pub mean_inliers: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub frames: usize,
    pub counts: StatusCounts,
    /// Core metrics over OK frames.
    pub position_error: Option<Stats>,
    pub angular_error: Option<Stats>,
    pub observed_surface_error: Option<Stats>,
    /// Refined position error over every frame.
    pub od_position_error: Option<Stats>,
    pub solar_angle_bins: Vec<Bin>,
    pub off_nadir_bins: Vec<Bin>,
}

/// Bins of `width` degrees covering `[0, top]`, the last one closed.
pub fn angle_bins(reports: &[FrameReport], width: f64, top: f64, angle: impl Fn(&FrameReport) -> f64) -> Vec<Bin> {
    let n = (top / width).ceil() as usize;
    (0..n)
        .map(|k| {
            let lo = k as f64 * width;
            let hi = (lo + width).min(top);
            let last = k + 1 == n;
            let members: Vec<&FrameReport> = reports
                .iter()
                .filter(|r| {
                    let a = angle(r);
                    a >= lo && (a < hi || (last && a <= hi))
                })
                .collect();
            let ok: Vec<&FrameReport> = members.iter().copied().filter(|r| r.status == FrameStatus::Ok).collect();
            let mean_inliers = (!ok.is_empty())
                .then(|| ok.iter().map(|r| r.inlier_count as f64).sum::<f64>() / ok.len() as f64);
            Bin {
                lo,
                hi,
                frames: members.len(),
                ok: ok.len(),
                position_error: Stats::of(ok.iter().filter_map(|r| r.errors.map(|e| e.position))),
                observed_surface_error: Stats::of(ok.iter().filter_map(|r| r.errors.map(|e| e.observed_surface))),
                mean_inliers,
            }
        })
        .collect()
}

/// Metric statistics of a batch. `refined` must hold one position per
/// report, in the same order, when given.
pub fn summarize(reports: &[FrameReport], refined: Option<&[TimedPosition]>) -> Summary {
    let mut counts = StatusCounts::default();
    for r in reports {
        counts.add(r.status);
    }
    let errs = || reports.iter().filter_map(|r| r.errors);
    let od_position_error = refined
        .filter(|p| p.len() == reports.len())
        .and_then(|p| Stats::of(p.iter().zip(reports).map(|(q, r)| (q.position - r.truth.position).norm())));
    Summary {
        frames: reports.len(),
        counts,
        position_error: Stats::of(errs().map(|e| e.position)),
        angular_error: Stats::of(errs().map(|e| e.angular)),
        observed_surface_error: Stats::of(errs().map(|e| e.observed_surface)),
        od_position_error,
        solar_angle_bins: angle_bins(reports, 10.0, 90.0, |r| r.solar_angle),
        off_nadir_bins: angle_bins(reports, 5.0, 90.0, |r| r.off_nadir()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalogue::synth::{generate, SynthConfig};
    use crate::catalogue::CatalogueEntry;
    use crate::mission::{generate_schedule, MissionConfig};
    use crate::od::orbital_period;
    use crate::MU_MOON_KM3_S2 as MU;

    fn frames(n: usize) -> Vec<FrameInput> {
        let cfg = MissionConfig {
            duration_days: 5.0,
            ..MissionConfig::default()
        };
        generate_schedule(&cfg, MU)
            .unwrap()
            .frames
            .into_iter()
            .take(n)
            .map(|f| FrameInput {
                timestamp: f.timestamp,
                truth: f.truth_pose,
                sun_direction: cfg.sun.direction(f.timestamp),
                solar_angle: f.solar_angle,
                detections: None,
            })
            .collect()
    }

    #[test]
    fn prior_examples() {
        let truth = frames(1)[0].truth;
        assert_eq!(init_prior(&truth, 0.0, 0.0, 9), truth);
        for seed in 0..200 {
            let p = init_prior(&truth, 11_000.0, 0.02, seed);
            let d = p.position - truth.position;
            assert!(d.iter().all(|c| c.abs() <= 11_000.0));
            assert!(angular_error(&p.rotation, &truth.rotation) <= 3f64.sqrt() * 0.02);
            assert_eq!(p, init_prior(&truth, 11_000.0, 0.02, seed));
        }
    }

    #[test]
    fn noiseless_frames_recover_truth() {
        let cat = generate(&SynthConfig::default());
        let cfg = CoreConfig {
            noise: NoiseConfig::noiseless(),
            ..CoreConfig::default()
        };
        let inputs = frames(12);
        let mut ok = 0;
        for input in &inputs {
            let r = run_core(input, &cat, &cfg);
            assert_eq!(r.errors.is_some(), r.status == FrameStatus::Ok);
            if let Some(e) = r.errors {
                assert!(e.position < 1.0, "{e:?}");
                assert!(e.angular < 1e-3);
                ok += 1;
            }
        }
        assert!(ok >= 11, "{ok}");
    }

    #[test]
    fn empty_catalogue_region_yields_no_result() {
        // a single crater on the far side of the Moon from every frame
        let input = &frames(1)[0];
        let away = -input.truth.position.normalize();
        let lat = away.z.asin().to_degrees();
        let lon = away.y.atan2(away.x).to_degrees();
        let cat = Catalogue::new(alloc::vec![CatalogueEntry::new("X", lat, lon, 5_000.0)]).unwrap();
        let r = run_core(input, &cat, &CoreConfig::default());
        assert!(matches!(r.status, FrameStatus::NoResultCda | FrameStatus::NoResultCid));
        assert!(r.errors.is_none() && r.pose_estimate.is_none());
    }

    #[test]
    fn gate_rejects_thin_support() {
        let cat = generate(&SynthConfig::default());
        let cfg = CoreConfig {
            noise: NoiseConfig::noiseless(),
            min_inliers: 10_000,
            ..CoreConfig::default()
        };
        for input in frames(3) {
            let r = run_core(&input, &cat, &cfg);
            assert_ne!(r.status, FrameStatus::Ok);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let cat = generate(&SynthConfig::default());
        let cfg = CoreConfig {
            seed: 77,
            ..CoreConfig::default()
        };
        let input = &frames(2)[1];
        assert_eq!(run_core(input, &cat, &cfg), run_core(input, &cat, &cfg));
    }

    fn synthetic_reports(fail_every: usize) -> (Vec<FrameReport>, Vec<f64>) {
        let cfg = MissionConfig {
            duration_days: 5.0 * orbital_period(1837.7, MU) / 86_400.0,
            ..MissionConfig::default()
        };
        let s = generate_schedule(&cfg, MU).unwrap();
        let reports: Vec<FrameReport> = s
            .frames
            .iter()
            .enumerate()
            .map(|(k, f)| {
                let ok = fail_every == 0 || k % fail_every != 0;
                FrameReport {
                    timestamp: f.timestamp,
                    status: if ok { FrameStatus::Ok } else { FrameStatus::NoResultCid },
                    pose_estimate: ok.then_some(f.truth_pose),
                    truth: f.truth_pose,
                    prior: f.truth_pose,
                    detections: 0,
                    correspondences: 0,
                    inlier_count: 0,
                    errors: ok.then_some(FrameErrors {
                        position: 0.0,
                        angular: 0.0,
                        observed_surface: 0.0,
                    }),
                    solar_angle: f.solar_angle,
                    runtime: 0.0,
                }
            })
            .collect();
        let times = reports.iter().map(|r| r.timestamp).collect();
        (reports, times)
    }

    #[test]
    fn od_covers_every_time_in_order() {
        let (reports, times) = synthetic_reports(3);
        let spin = MissionConfig::default().sun;
        let out = run_od(&reports, &times, MU, None, |t| spin.inertial_to_world(t)).unwrap();
        assert_eq!(out.positions.len(), times.len());
        for ((p, t), r) in out.positions.iter().zip(&times).zip(&reports) {
            assert_eq!(p.timestamp, *t);
            assert!((p.position - r.truth.position).norm() < 1.0);
        }
        let summary = summarize(&reports, Some(&out.positions));
        assert_eq!(summary.counts.total(), reports.len());
        assert!(summary.od_position_error.unwrap().mean < 1.0);
    }

    #[test]
    fn windowed_od_covers_every_time() {
        let (reports, times) = synthetic_reports(0);
        let span = times.last().unwrap() - times[0];
        let spin = MissionConfig::default().sun;
        let out = run_od(&reports, &times, MU, Some(span / 2.0 + 1.0), |t| spin.inertial_to_world(t)).unwrap();
        assert_eq!(out.fits.len(), 2);
        assert_eq!(out.positions.len(), times.len());
    }

    #[test]
    fn stats_examples() {
        let one = Stats::of([5.0]).unwrap();
        assert_eq!((one.mean, one.median, one.rms, one.std), (5.0, 5.0, 5.0, 0.0));
        let two = Stats::of([3.0, 4.0]).unwrap();
        assert!((two.rms - 12.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(two.median, 3.5);
        assert!(Stats::of([]).is_none());
        assert_eq!(Stats::of([1.0, f64::INFINITY]).unwrap().count, 1);
    }

    #[test]
    fn solar_bins_are_decades() {
        let (reports, _) = synthetic_reports(0);
        let bins = summarize(&reports, None).solar_angle_bins;
        assert_eq!(bins.len(), 9);
        for (k, b) in bins.iter().enumerate() {
            assert_eq!((b.lo, b.hi), (10.0 * k as f64, 10.0 * (k + 1) as f64));
        }
        assert_eq!(bins.iter().map(|b| b.frames).sum::<usize>(), reports.len());
    }

    #[test]
    fn status_names_round_trip() {
        for s in FrameStatus::ALL {
            assert_eq!(FrameStatus::parse(s.as_str()), Some(s));
        }
    }
}
