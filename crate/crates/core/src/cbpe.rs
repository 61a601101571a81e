//! Perspective-n-Crater pose refinement.
//!
//! The pose is parameterised relative to the prior `(R†, t†)` as
//! `R = exp(ω)·R†`, `t = t† + Δt`, so the box constraints become
//! `‖ω‖ ≤ δ` and `‖Δt‖ ≤ γ` and are enforced by radial clamping. Tukey's
//! biweight is minimised by IRLS: each outer iteration fixes the weights
//! from the current residuals and solves the weighted least-squares problem
//! over the pairs with non-zero weight.

use alloc::vec::Vec;

use nalgebra::{SVector, Vector3};
#[allow(unused_imports)]
use num_traits::Float;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalogue::Catalogue;
use crate::cid::{ellipse_residual, ellipse_residual_vector, CorrespondenceSet};
use crate::detector::FrameDetections;
use crate::geometry::{project_crater, so3_exp, CameraIntrinsics, CraterDisc, EllipseParams, Pose};
use crate::lsq::{minimize, LmOptions};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum PncError {
    #[error("fewer than three correspondences")]
    InsufficientCorrespondences,
    #[error("every correspondence is an outlier")]
    Degenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PncConfig {
    /// Tukey scale.
    pub alpha: f64,
    /// Attitude bound around the prior, degrees.
    pub delta_deg: f64,
    /// Position bound around the prior, metres.
    pub gamma: f64,
    pub max_irls_iters: usize,
    /// Relative objective decrease below which IRLS stops.
    pub convergence_tol: f64,
}

impl Default for PncConfig {
    fn default() -> Self {
        Self {
            alpha: 20.0,
            delta_deg: 0.02,
            gamma: 11_000.0,
            max_irls_iters: 30,
            convergence_tol: 1e-10,
        }
    }
}

impl PncConfig {
    pub fn is_valid(&self) -> bool {
        self.alpha > 0.0 && self.delta_deg > 0.0 && self.gamma > 0.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PncResult {
    pub pose: Pose,
    /// Pairs with `|residual| ≤ α` at `pose`.
    pub inlier_count: usize,
    /// Ellipse distance per pair at `pose`, `+∞` where the crater no longer
    /// projects to an ellipse.
    pub residuals: Vec<f64>,
    /// Tukey weight per pair at `pose`.
    pub weights: Vec<f64>,
    pub converged: bool,
    /// Robust objective at the prior and after every outer iteration.
    pub objective_history: Vec<f64>,
}

/// Tukey's biweight loss.
pub fn tukey_loss(f: f64, alpha: f64) -> f64 {
    let cap = alpha * alpha / 6.0;
    if f.abs() <= alpha {
        let u = 1.0 - (f / alpha).powi(2);
        cap * (1.0 - u * u * u)
    } else {
        cap
    }
}

/// IRLS weight `ψ(f)/f` of [`tukey_loss`].
pub fn tukey_weight(f: f64, alpha: f64) -> f64 {
    if f.abs() <= alpha {
        let u = 1.0 - (f / alpha).powi(2);
        u * u
    } else {
        0.0
    }
}

/// Sum of Tukey losses, the objective being minimised.
pub fn robust_objective(residuals: &[f64], alpha: f64) -> f64 {
    residuals.iter().map(|&f| tukey_loss(f, alpha)).sum()
}

/// Refine the pose from CID correspondences. `cat` is the catalogue the
/// correspondence indices refer to.
pub fn pnc_solve(
    frame: &FrameDetections,
    corr: &CorrespondenceSet,
    cat: &Catalogue,
    prior: &Pose,
    cam: &CameraIntrinsics,
    cfg: &PncConfig,
) -> Result<PncResult, PncError> {
    let pairs: Vec<(EllipseParams, CraterDisc)> = corr
        .pairs
        .iter()
        .map(|&(i, j)| (frame.detections[i].ellipse, cat.discs()[j]))
        .collect();
    pnc_refine(&pairs, prior, cam, cfg)
}

/// [`pnc_solve`] on explicit (detection, crater) pairs.
pub fn pnc_refine(
    pairs: &[(EllipseParams, CraterDisc)],
    prior: &Pose,
    cam: &CameraIntrinsics,
    cfg: &PncConfig,
) -> Result<PncResult, PncError> {
    if pairs.len() < 3 {
        return Err(PncError::InsufficientCorrespondences);
    }
    let delta = cfg.delta_deg.to_radians();
    let pose_of = |x: &SVector<f64, 6>| {
        let omega = Vector3::new(x[0], x[1], x[2]);
        let dt = Vector3::new(x[3], x[4], x[5]);
        Pose::new(so3_exp(&omega) * prior.rotation, prior.position + dt)
    };
    let project = |x: &mut SVector<f64, 6>| {
        let mut omega = Vector3::new(x[0], x[1], x[2]);
        let mut dt = Vector3::new(x[3], x[4], x[5]);
        let n = omega.norm();
        if n > delta {
            omega *= delta / n;
        }
        let n = dt.norm();
        if n > cfg.gamma {
            dt *= cfg.gamma / n;
        }
        x.fixed_rows_mut::<3>(0).copy_from(&omega);
        x.fixed_rows_mut::<3>(3).copy_from(&dt);
    };
    let residuals_at = |x: &SVector<f64, 6>| -> Vec<f64> {
        let pose = pose_of(x);
        pairs
            .iter()
            .map(|(d, c)| match project_crater(c, &pose, cam) {
                Ok(e) => ellipse_residual(d, &e),
                Err(_) => f64::INFINITY,
            })
            .collect()
    };

    let mut x = SVector::<f64, 6>::zeros();
    let mut res = residuals_at(&x);
    let mut objective = robust_objective(&res, cfg.alpha);
    let mut history = alloc::vec![objective];
    let mut converged = false;
    let opts = LmOptions {
        max_iters: 100,
        rel_tol: 1e-14,
        abs_tol: 0.0,
        fd_step: SVector::<f64, 6>::from_column_slice(&[1e-7, 1e-7, 1e-7, 1e-3, 1e-3, 1e-3]),
        lambda0: 1e-3,
    };

    // When the prior is too far off for three pairs to fall inside α, start
    // from a wider Tukey scale and halve it back to α one outer iteration at
    // a time.
    let needed = pairs.len().min(3);
    let mut scale = cfg.alpha;
    let mut widenings = 0;
    while res.iter().filter(|f| f.abs() <= scale).count() < needed {
        if widenings == 40 {
            return Err(PncError::Degenerate);
        }
        scale *= 2.0;
        widenings += 1;
    }

    for _ in 0..cfg.max_irls_iters + widenings {
        let weights: Vec<f64> = res.iter().map(|&f| tukey_weight(f, scale)).collect();
        let active: Vec<(f64, &(EllipseParams, CraterDisc))> = weights
            .iter()
            .zip(pairs)
            .filter(|(w, _)| **w > 0.0)
            .map(|(w, p)| (w.sqrt(), p))
            .collect();
        if active.is_empty() {
            return Err(PncError::Degenerate);
        }
        let residual = |x: &SVector<f64, 6>, r: &mut Vec<f64>| -> bool {
            r.clear();
            let pose = pose_of(x);
            for (sw, (d, c)) in &active {
                let Ok(e) = project_crater(c, &pose, cam) else {
                    return false;
                };
                r.extend(ellipse_residual_vector(d, &e).iter().map(|v| sw * v));
            }
            true
        };
        let Some(out) = minimize(x, residual, project, &opts) else {
            break;
        };
        let new_res = residuals_at(&out.x);
        let new_objective = robust_objective(&new_res, cfg.alpha);
        if scale > cfg.alpha {
            x = out.x;
            res = new_res;
            objective = new_objective;
            history.push(objective);
            scale = (0.5 * scale).max(cfg.alpha);
            continue;
        }
        if new_objective > objective {
            // the weighted step majorises the Tukey sum, so this only
            // happens through round-off; keep the previous pose
            converged = true;
            break;
        }
        // measured on the pairs that took part, so constant outlier terms
        // do not change when iteration stops
        let active_loss = |r: &[f64]| -> f64 {
            r.iter()
                .zip(&weights)
                .filter(|(_, w)| **w > 0.0)
                .map(|(f, _)| tukey_loss(*f, cfg.alpha))
                .sum()
        };
        let (before, after) = (active_loss(&res), active_loss(&new_res));
        x = out.x;
        res = new_res;
        objective = new_objective;
        history.push(objective);
        if before - after <= cfg.convergence_tol * before {
            converged = true;
            break;
        }
    }

    let weights: Vec<f64> = res.iter().map(|&f| tukey_weight(f, cfg.alpha)).collect();
    Ok(PncResult {
        pose: pose_of(&x),
        inlier_count: res.iter().filter(|f| f.abs() <= cfg.alpha).count(),
        residuals: res,
        weights,
        converged,
        objective_history: history,
    })
}

/// The pose if at least `min_inliers` pairs support it.
pub fn gate_result(res: &PncResult, min_inliers: usize) -> Option<Pose> {
    (res.inlier_count >= min_inliers).then_some(res.pose)
}
