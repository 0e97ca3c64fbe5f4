//! Probabilistic occupancy mapping: log-odds ray integration, tri-state
//! classification, frontiers, egocentric crops and coverage accounting.

mod bresenham;
mod coverage;
mod frontier;
mod pgm;
mod probmap;
mod semantic;

use thiserror::Error;

pub use bresenham::bresenham;
pub use coverage::{coverage_ratio, update_coverage, CoverageState};
pub use frontier::{detect_frontiers, FrontierSet};
pub use pgm::{GrayImage, TRAJECTORY_GRAY};
pub use probmap::{MapParams, ProbMap, Traversal, TriGrid, TriState};
pub use semantic::{extract_egocentric, EgoSemanticMap, SemanticCell, SemanticView, EGO_SIZE};

/// Side length of the global map window, in cells.
pub const GLOBAL_MAP_SIZE: usize = 128;

#[derive(Debug, Error, PartialEq)]
pub enum MappingError {
    #[error("scene {scene:?} does not fit in a {map:?} map")]
    SceneTooLarge { scene: (usize, usize), map: (usize, usize) },
    #[error("map and ground truth disagree: {0}")]
    DimensionMismatch(String),
}
