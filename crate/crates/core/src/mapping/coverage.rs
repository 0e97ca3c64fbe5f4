use super::probmap::{ProbMap, TriState};
use super::MappingError;
use crate::geometry::Cell;
use crate::scalar::LogOdds;
use crate::scene::GroundTruthSurface;

/// Ground-truth surface cells currently classified Occupied, and the
/// resulting coverage ratio.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CoverageState {
    /// Covered cells in scene coordinates, row-major order.
    pub covered: Vec<Cell>,
    /// Coverage ratio in percent.
    pub ratio: f64,
}

impl CoverageState {
    pub fn covered_count(&self) -> usize {
        self.covered.len()
    }
}

/// CR = 100 · |covered| / N*.
pub fn coverage_ratio(covered: usize, total: usize) -> f64 {
    100.0 * covered as f64 / total as f64
}

pub fn update_coverage<L: LogOdds>(map: &ProbMap<L>, gt: &GroundTruthSurface) -> Result<CoverageState, MappingError> {
    if (gt.cell_size() - map.cell_size()).abs() > 1e-12 {
        return Err(MappingError::DimensionMismatch(format!(
            "cell size {} vs map {}",
            gt.cell_size(),
            map.cell_size()
        )));
    }
    let mut covered = Vec::new();
    for g in gt.cells() {
        let m = map.scene_to_map(*g);
        if !map.in_bounds(m) {
            return Err(MappingError::DimensionMismatch(format!(
                "surface cell ({}, {}) lies outside the map",
                g.x, g.y
            )));
        }
        if map.classify_cell(m) == TriState::Occupied {
            covered.push(*g);
        }
    }
    let ratio = coverage_ratio(covered.len(), gt.count());
    Ok(CoverageState { covered, ratio })
}
