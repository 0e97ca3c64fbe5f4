//! Gaussian observation noise: depth perturbation and pose drift.
//!
//! Noise only corrupts what the mapper sees. Collisions and ray casting always
//! use the true pose.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::DepthScan;
use crate::geometry::Pose2;
use crate::scalar::Real;

/// Lower clamp for perturbed or degenerate ranges, in meters.
pub const MIN_RANGE: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// σ²_P in m².
    pub pose_variance: f64,
    /// Random-walk drift (true) or a fresh draw per keyframe (false).
    pub pose_cumulative: bool,
    /// σ²_D in m².
    pub depth_variance: f64,
    /// Keyframes over which cumulative drift reaches variance σ²_P; each
    /// keyframe adds `σ²_P / drift_horizon`.
    pub drift_horizon: u32,
}

impl Default for NoiseModel {
    fn default() -> Self {
        Self::noiseless()
    }
}

impl NoiseModel {
    pub fn noiseless() -> Self {
        Self {
            pose_variance: 0.0,
            pose_cumulative: true,
            depth_variance: 0.0,
            drift_horizon: 50,
        }
    }

    pub fn is_noiseless(&self) -> bool {
        self.pose_variance == 0.0 && self.depth_variance == 0.0
    }

    pub fn has_pose_noise(&self) -> bool {
        self.pose_variance > 0.0
    }

    /// Compact label such as `p0.1*_d0.05` (`*` marks per-step pose noise).
    pub fn label(&self) -> String {
        format!(
            "p{}{}_d{}",
            self.pose_variance,
            if self.pose_cumulative { "" } else { "*" },
            self.depth_variance
        )
    }

    pub fn validate(&self) -> Result<(), String> {
        if !(self.pose_variance >= 0.0 && self.pose_variance.is_finite()) {
            return Err("pose variance must be a finite value >= 0".into());
        }
        if !(self.depth_variance >= 0.0 && self.depth_variance.is_finite()) {
            return Err("depth variance must be a finite value >= 0".into());
        }
        if self.drift_horizon == 0 {
            return Err("drift horizon must be at least 1".into());
        }
        Ok(())
    }
}

fn normal(variance: f64) -> Normal<f64> {
    Normal::new(0.0, variance.sqrt()).expect("finite non-negative variance")
}

/// Perturbs every hit range by N(0, σ²_D) and clamps into `(0, max_range]`.
pub fn apply_depth_noise<S: Real, R: Rng + ?Sized>(
    scan: &DepthScan<S>,
    model: &NoiseModel,
    rng: &mut R,
) -> DepthScan<S> {
    if model.depth_variance == 0.0 {
        return scan.clone();
    }
    let dist = normal(model.depth_variance);
    let mut out = scan.clone();
    for ray in out.rays.iter_mut().filter(|r| r.hit) {
        let perturbed = ray.range + S::lit(dist.sample(rng));
        ray.range = perturbed.max(S::lit(MIN_RANGE)).min(scan.max_range);
    }
    out
}

/// Accumulated x/y drift of one episode.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct PoseDrift {
    pub x: f64,
    pub y: f64,
}

/// Reported pose for keyframe `step_index` (0 is the exactly known start).
/// Heading is never perturbed.
pub fn apply_pose_noise<S: Real, R: Rng + ?Sized>(
    true_pose: &Pose2<S>,
    model: &NoiseModel,
    step_index: usize,
    drift: &mut PoseDrift,
    rng: &mut R,
) -> Pose2<S> {
    if model.pose_variance == 0.0 || step_index == 0 {
        return *true_pose;
    }
    let (ex, ey) = if model.pose_cumulative {
        let dist = normal(model.pose_variance / model.drift_horizon as f64);
        drift.x += dist.sample(rng);
        drift.y += dist.sample(rng);
        (drift.x, drift.y)
    } else {
        let dist = normal(model.pose_variance);
        (dist.sample(rng), dist.sample(rng))
    };
    true_pose.translated(S::lit(ex), S::lit(ey))
}
