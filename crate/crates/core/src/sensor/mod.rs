//! Simulated planar depth sensing against the ground-truth scene, plus the
//! pose and depth noise models.

mod noise;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Cell, Pose2, RayWalk};
use crate::scalar::Real;
use crate::scene::SceneGrid;

pub use noise::{apply_depth_noise, apply_pose_noise, NoiseModel, PoseDrift, MIN_RANGE};

#[derive(Debug, Error, PartialEq)]
pub enum SensorError {
    #[error("sensor origin ({x:.3}, {y:.3}) lies inside an occupied cell")]
    InsideObstacle { x: f64, y: f64 },
    #[error("invalid sensor parameters: {0}")]
    InvalidParams(&'static str),
}

/// Geometry of one planar depth capture.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SensorConfig {
    pub fov: f64,
    pub n_rays: usize,
    pub max_range: f64,
}

impl Default for SensorConfig {
    fn default() -> Self {
        Self {
            fov: std::f64::consts::FRAC_PI_2,
            n_rays: 256,
            max_range: 5.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Ray<S> {
    /// Angle relative to the scan heading.
    pub angle: S,
    pub range: S,
    pub hit: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DepthScan<S> {
    pub origin: Pose2<S>,
    pub rays: Vec<Ray<S>>,
    pub fov: S,
    pub max_range: S,
}

impl<S: Real> DepthScan<S> {
    /// World-frame direction of a ray.
    pub fn world_angle(&self, ray: &Ray<S>) -> S {
        self.origin.theta + ray.angle
    }

    /// World point at the reported range of a ray.
    pub fn endpoint(&self, ray: &Ray<S>) -> (S, S) {
        let (s, c) = self.world_angle(ray).sin_cos();
        (self.origin.x + c * ray.range, self.origin.y + s * ray.range)
    }
}

/// Ray offsets evenly spanning `[-fov/2, fov/2]` at bin centers, so that
/// adjacent captures with abutting fields of view tile the circle uniformly.
pub fn ray_offsets<S: Real>(fov: S, n_rays: usize) -> impl Iterator<Item = S> {
    let n = S::lit(n_rays as f64);
    let half = S::lit(0.5);
    (0..n_rays).map(move |i| -fov * half + (S::lit(i as f64) + half) * fov / n)
}

/// Casts one ray by cell-by-cell traversal (Amanatides & Woo). Returns the
/// distance to the boundary of the first occupied cell, or `None` when no
/// occupied cell is entered within `max_range`.
pub fn march<S: Real>(scene: &SceneGrid, x: S, y: S, angle: S, max_range: S) -> Option<S> {
    for (cell, t) in RayWalk::new(x, y, angle, S::lit(scene.cell_size())).skip(1) {
        if t > max_range {
            return None;
        }
        if scene.is_occupied(cell) {
            return Some(t.max(S::lit(MIN_RANGE)));
        }
    }
    unreachable!("ray walks are unbounded")
}

#[allow(clippy::neg_cmp_op_on_partial_ord)] // NaN must fail the checks
pub fn raycast<S: Real>(
    scene: &SceneGrid,
    pose: &Pose2<S>,
    fov: S,
    n_rays: usize,
    max_range: S,
) -> Result<DepthScan<S>, SensorError> {
    if n_rays == 0 {
        return Err(SensorError::InvalidParams("n_rays must be at least 1"));
    }
    if !(max_range > S::zero()) || !(fov > S::zero()) {
        return Err(SensorError::InvalidParams("fov and max_range must be positive"));
    }
    if scene.is_occupied(pose.cell(S::lit(scene.cell_size()))) {
        return Err(SensorError::InsideObstacle {
            x: pose.x.as_f64(),
            y: pose.y.as_f64(),
        });
    }
    let rays = ray_offsets(fov, n_rays)
        .map(|offset| match march(scene, pose.x, pose.y, pose.theta + offset, max_range) {
            Some(range) => Ray { angle: offset, range, hit: true },
            None => Ray { angle: offset, range: max_range, hit: false },
        })
        .collect();
    Ok(DepthScan {
        origin: *pose,
        rays,
        fov,
        max_range,
    })
}

/// Four captures at headings θ, θ+π/2, θ+π, θ+3π/2.
pub fn capture_panorama<S: Real>(
    scene: &SceneGrid,
    pose: &Pose2<S>,
    fov: S,
    n_rays: usize,
    max_range: S,
) -> Result<[DepthScan<S>; 4], SensorError> {
    let quarter = S::FRAC_PI_2();
    let scan = |k: usize| {
        let heading = Pose2::new(pose.x, pose.y, pose.theta + quarter * S::lit(k as f64));
        raycast(scene, &heading, fov, n_rays, max_range)
    };
    Ok([scan(0)?, scan(1)?, scan(2)?, scan(3)?])
}

/// Cells struck by the hit rays of a scan: along each ray, the last cell
/// entered at or before the reported range.
pub fn hit_cells<S: Real>(scene: &SceneGrid, scan: &DepthScan<S>) -> Vec<Cell> {
    let cs = S::lit(scene.cell_size());
    let mut cells: Vec<Cell> = scan
        .rays
        .iter()
        .filter(|r| r.hit)
        .filter_map(|r| {
            RayWalk::new(scan.origin.x, scan.origin.y, scan.world_angle(r), cs)
                .take_while(|(_, t)| *t <= r.range)
                .last()
                .map(|(c, _)| c)
        })
        .collect();
    cells.sort();
    cells.dedup();
    cells
}
