use super::probmap::{TriGrid, TriState};
use crate::geometry::Cell;

/// Frontier cells of a tri-state grid: Free cells with an Unknown 4-neighbor
/// inside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontierSet {
    width: usize,
    mask: Vec<bool>,
    cells: Vec<Cell>,
}

impl FrontierSet {
    /// Frontier cells in row-major order.
    pub fn cells(&self) -> &[Cell] {
        &self.cells
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= 0
            && c.y >= 0
            && (c.x as usize) < self.width
            && self.mask.get(c.y as usize * self.width + c.x as usize).copied().unwrap_or(false)
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }
}

/// Applies the free/unknown boundary kernel (a 4-neighbor cross over the
/// Unknown indicator, gated by the Free indicator) to every cell.
pub fn detect_frontiers(tri: &TriGrid) -> FrontierSet {
    let (w, h) = (tri.width(), tri.height());
    let states = tri.as_slice();
    let unknown: Vec<bool> = states.iter().map(|s| *s == TriState::Unknown).collect();
    let mut mask = vec![false; w * h];
    let mut cells = Vec::new();
    for y in 0..h {
        let row = y * w;
        for x in 0..w {
            let i = row + x;
            if states[i] != TriState::Free {
                continue;
            }
            let hit = (x > 0 && unknown[i - 1])
                || (x + 1 < w && unknown[i + 1])
                || (y > 0 && unknown[i - w])
                || (y + 1 < h && unknown[i + w]);
            if hit {
                mask[i] = true;
                cells.push(Cell::new(x as i32, y as i32));
            }
        }
    }
    FrontierSet { width: w, mask, cells }
}
