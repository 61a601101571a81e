//! PECAN against a brute-force search over every hypothesis.

use crater_nav_core::catalogue::synth::{generate, SynthConfig};
use crater_nav_core::catalogue::{visibility_subcatalogue, Catalogue, VisibilityQuery};
use crater_nav_core::cid::{exhaustive_best, pecan_match, pecan_search, CidConfig, CidError};
use crater_nav_core::detector::{simulate_detections, FrameDetections, NoiseConfig};
use crater_nav_core::geometry::Pose;
use crater_nav_core::mission::{generate_schedule, MissionConfig};
use crater_nav_core::pipeline::{frame_seed, init_prior, CoreConfig};
use crater_nav_core::MU_MOON_KM3_S2 as MU;

struct Case {
    frame: FrameDetections,
    sub: Catalogue,
    prior: Pose,
}

/// Small frames from a sparse catalogue: at most 10 detections and 50
/// candidate craters.
fn cases(n: usize) -> Vec<Case> {
    let cat = generate(&SynthConfig {
        count: 20_000,
        seed: 3,
        ..SynthConfig::default()
    });
    let core = CoreConfig {
        noise: NoiseConfig {
            clutter_rate: 2.0,
            ..NoiseConfig::default()
        },
        ..CoreConfig::default()
    };
    let mission = MissionConfig {
        duration_days: 30.0,
        ..MissionConfig::default()
    };
    let schedule = generate_schedule(&mission, MU).unwrap();
    let query = VisibilityQuery {
        pos_uncertainty: core.position_bound(),
        att_uncertainty_deg: core.attitude_bound(),
        image_size: core.image_size,
        min_semi_minor: 0.5 * core.noise.min_semi_minor,
    };
    let mut out = Vec::new();
    for f in &schedule.frames {
        let seed = frame_seed(11, f.timestamp);
        let noise = NoiseConfig { seed, ..core.noise };
        let sun = mission.sun.direction(f.timestamp);
        let frame = simulate_detections(&f.truth_pose, &cat, &core.camera, &noise, core.image_size, &sun);
        if frame.is_empty() || frame.len() > 10 {
            continue;
        }
        let prior = init_prior(&f.truth_pose, core.prior_pos_sigma, core.prior_att_sigma, seed);
        let Ok(sub) = visibility_subcatalogue(&cat, &prior, &query, &core.camera) else {
            continue;
        };
        if sub.len() > 50 {
            continue;
        }
        out.push(Case { frame, sub, prior });
        if out.len() == n {
            break;
        }
    }
    out
}

fn cid_config(termination_fraction: f64) -> (CoreConfig, CidConfig) {
    let core = CoreConfig::default();
    let cfg = CidConfig {
        pos_uncertainty: core.position_bound(),
        termination_fraction,
        ..CidConfig::default()
    };
    (core, cfg)
}

#[test]
fn full_search_reaches_the_exhaustive_maximum() {
    let cases = cases(50);
    assert_eq!(cases.len(), 50);
    let (core, cfg) = cid_config(1.0);
    for (k, c) in cases.iter().enumerate() {
        let oracle = exhaustive_best(&c.frame, &c.sub, &c.prior, &core.camera, &cfg).map(|(s, _)| s);
        let search = pecan_search(&c.frame, &c.sub, &c.prior, &core.camera, &cfg).unwrap();
        assert_eq!(search.best.map(|(s, _)| s), oracle, "case {k}");
    }
}

#[test]
fn early_exit_clears_the_threshold_and_never_beats_the_oracle() {
    let cases = cases(50);
    let (core, cfg) = cid_config(0.6);
    for c in &cases {
        let oracle = exhaustive_best(&c.frame, &c.sub, &c.prior, &core.camera, &cfg).map_or(0, |(s, _)| s);
        match pecan_match(&c.frame, &c.sub, &c.prior, &core.camera, &cfg) {
            Ok(set) => {
                assert!(set.score as f64 > 0.6 * c.frame.len() as f64 || set.score == c.frame.len());
                assert!(set.score <= oracle);
            }
            Err(CidError::NoResult) => assert!(oracle as f64 <= 0.6 * c.frame.len() as f64 && oracle < c.frame.len()),
            Err(e) => panic!("{e}"),
        }
    }
}
