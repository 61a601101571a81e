use std::path::{Path, PathBuf};

use anyhow::{ensure, Context};
use crater_nav_core::catalogue::synth::SynthConfig;
use crater_nav_core::cbpe::PncConfig;
use crater_nav_core::cid::CidConfig;
use crater_nav_core::detector::NoiseConfig;
use crater_nav_core::geometry::CameraIntrinsics;
use crater_nav_core::mission::MissionConfig;
use crater_nav_core::pipeline::CoreConfig;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

/// Everything a run depends on. Every field has a default, so a TOML file
/// only lists what it changes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    /// 0 for the plain core, 6 for the gated variant.
    pub min_inliers: usize,
    /// Componentwise prior position bound γ, metres.
    pub prior_pos_sigma: f64,
    /// Per-axis prior Euler-angle bound δ, degrees.
    pub prior_att_sigma: f64,
    pub reassociation_passes: usize,
    /// Catalogue CSV; a synthetic catalogue from `synth` when absent.
    pub catalogue_path: Option<PathBuf>,
    /// External detections JSON; simulated detections when absent.
    pub detections_path: Option<PathBuf>,
    /// Orbit-fit window, seconds; one fit for the whole batch when absent.
    pub od_window_s: Option<f64>,
    pub image_size: [f64; 2],
    pub camera: CameraIntrinsics,
    pub mission: MissionConfig,
    pub noise: NoiseConfig,
    pub cid: CidConfig,
    pub pnc: PncConfig,
    pub synth: SynthConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let core = CoreConfig::default();
        Self {
            seed: core.seed,
            min_inliers: core.min_inliers,
            prior_pos_sigma: core.prior_pos_sigma,
            prior_att_sigma: core.prior_att_sigma,
            reassociation_passes: core.reassociation_passes,
            catalogue_path: None,
            detections_path: None,
            od_window_s: None,
            image_size: core.image_size,
            camera: core.camera,
            mission: MissionConfig::default(),
            noise: core.noise,
            cid: core.cid,
            pnc: core.pnc,
            synth: SynthConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> anyhow::Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::from_toml(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serialises")
    }

    pub fn core_config(&self) -> CoreConfig {
        CoreConfig {
            camera: self.camera,
            image_size: self.image_size,
            noise: self.noise,
            cid: self.cid,
            pnc: self.pnc,
            min_inliers: self.min_inliers,
            prior_pos_sigma: self.prior_pos_sigma,
            prior_att_sigma: self.prior_att_sigma,
            reassociation_passes: self.reassociation_passes,
            seed: self.seed,
        }
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        ensure!(self.core_config().is_valid(), "invalid core configuration");
        self.mission.validate()?;
        ensure!(
            self.od_window_s.is_none_or(|w| w > 0.0 && w.is_finite()),
            "od_window_s must be positive"
        );
        Ok(())
    }

    /// SHA-256 of the canonical TOML form, hex.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }
}
