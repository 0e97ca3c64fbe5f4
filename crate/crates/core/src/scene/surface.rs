//! Derived scene products: the visible surface used as coverage ground truth
//! and the eroded start region.

use rand::Rng;

use super::{SceneError, SceneGrid};
use crate::geometry::{Cell, Pose2};
use crate::scalar::Real;

/// Occupied cells with at least one free 8-neighbor.
#[derive(Clone, Debug, PartialEq)]
pub struct GroundTruthSurface {
    cells: Vec<Cell>,
    width: usize,
    cell_size: f64,
    mask: Vec<bool>,
}

impl GroundTruthSurface {
    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    /// Surface cells in row-major order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    /// N*, the number of surface cells.
    pub fn count(&self) -> usize {
        self.cells.len()
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0
            && c.y >= 0
            && (c.x as usize) < self.width
            && self
                .mask
                .get(c.y as usize * self.width + c.x as usize)
                .copied()
                .unwrap_or(false)
    }
}

pub fn ground_truth_surface(scene: &SceneGrid) -> GroundTruthSurface {
    let mut mask = vec![false; scene.width() * scene.height()];
    let cells: Vec<Cell> = scene
        .cells()
        .filter(|c| scene.is_occupied(*c) && c.neighbors8().iter().any(|n| scene.is_free(*n)))
        .collect();
    for c in &cells {
        mask[c.y as usize * scene.width() + c.x as usize] = true;
    }
    GroundTruthSurface {
        cells,
        width: scene.width(),
        cell_size: scene.cell_size(),
        mask,
    }
}

/// Free cells whose whole `k×k` neighborhood is free (erosion of the free
/// mask, i.e. max pooling over occupancy).
#[derive(Clone, Debug, PartialEq)]
pub struct StartRegion {
    cells: Vec<Cell>,
}

impl StartRegion {
    pub const DEFAULT_KERNEL: usize = 3;

    pub fn new(scene: &SceneGrid, kernel: usize) -> Self {
        assert!(kernel % 2 == 1, "narrowing kernel must be odd");
        let r = (kernel / 2) as i32;
        let cells = scene
            .free_cells()
            .filter(|c| {
                (-r..=r).all(|dy| (-r..=r).all(|dx| scene.is_free(c.offset(dx, dy))))
            })
            .collect();
        Self { cells }
    }

    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Uniform cell center with a uniform heading in `[0, 2π)`.
    pub fn sample<S: Real, R: Rng + ?Sized>(
        &self,
        cell_size: S,
        rng: &mut R,
    ) -> Result<Pose2<S>, SceneError> {
        if self.cells.is_empty() {
            return Err(SceneError::EmptyStartRegion);
        }
        let cell = self.cells[rng.random_range(0..self.cells.len())];
        let theta = S::lit(rng.random::<f64>()) * S::TAU();
        let (x, y) = cell.center(cell_size);
        Ok(Pose2::new(x, y, theta))
    }
}

/// Samples a start pose from the default 3×3-eroded start region.
pub fn sample_start_pose<R: Rng + ?Sized>(
    scene: &SceneGrid,
    rng: &mut R,
) -> Result<Pose2<f64>, SceneError> {
    StartRegion::new(scene, StartRegion::DEFAULT_KERNEL).sample(scene.cell_size(), rng)
}
