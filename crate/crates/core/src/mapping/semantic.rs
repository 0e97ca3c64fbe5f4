//! Four-state semantic maps: the global view and the egocentric crop.

use serde::{Deserialize, Serialize};

use super::frontier::{detect_frontiers, FrontierSet};
use super::probmap::{ProbMap, TriGrid, TriState};
use crate::geometry::{Cell, Pose2};
use crate::scalar::{LogOdds, Real};

pub const EGO_SIZE: usize = 128;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SemanticCell {
    Occupied,
    Free,
    Unknown,
    Frontier,
}

impl SemanticCell {
    /// Wire character: `O`, `F`, `U` or `X`.
    pub fn code(self) -> char {
        match self {
            SemanticCell::Occupied => 'O',
            SemanticCell::Free => 'F',
            SemanticCell::Unknown => 'U',
            SemanticCell::Frontier => 'X',
        }
    }

    pub fn from_code(ch: char) -> Option<Self> {
        match ch {
            'O' => Some(SemanticCell::Occupied),
            'F' => Some(SemanticCell::Free),
            'U' => Some(SemanticCell::Unknown),
            'X' => Some(SemanticCell::Frontier),
            _ => None,
        }
    }

    /// Grayscale value used by map snapshots.
    pub fn gray(self) -> u8 {
        match self {
            SemanticCell::Occupied => 0,
            SemanticCell::Frontier => 64,
            SemanticCell::Unknown => 128,
            SemanticCell::Free => 255,
        }
    }
}

/// Tri-state classification plus frontier labels over the full map, computed
/// once per keyframe and shared by policies, planning and the crop.
#[derive(Clone, Debug)]
pub struct SemanticView {
    pub tri: TriGrid,
    pub frontiers: FrontierSet,
}

impl SemanticView {
    pub fn from_map<L: LogOdds>(map: &ProbMap<L>) -> Self {
        Self::from_tri(map.classify())
    }

    pub fn from_tri(tri: TriGrid) -> Self {
        let frontiers = detect_frontiers(&tri);
        Self { tri, frontiers }
    }

    pub fn get(&self, c: Cell) -> SemanticCell {
        if self.frontiers.contains(c) {
            return SemanticCell::Frontier;
        }
        match self.tri.get(c) {
            TriState::Occupied => SemanticCell::Occupied,
            TriState::Free => SemanticCell::Free,
            TriState::Unknown => SemanticCell::Unknown,
        }
    }

    /// Axis-aligned `size × size` crop centered on `center` (which lands at
    /// index `size / 2`); cells outside the map are Unknown.
    pub fn crop(&self, center: Cell, size: usize) -> EgoSemanticMap {
        let half = (size / 2) as i32;
        let mut cells = Vec::with_capacity(size * size);
        for j in 0..size as i32 {
            for i in 0..size as i32 {
                cells.push(self.get(center.offset(i - half, j - half)));
            }
        }
        EgoSemanticMap { size, cells }
    }
}

/// Agent-centered four-state map; the agent occupies cell `(size/2, size/2)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EgoSemanticMap {
    size: usize,
    cells: Vec<SemanticCell>,
}

impl EgoSemanticMap {
    pub fn from_cells(size: usize, cells: Vec<SemanticCell>) -> Self {
        assert_eq!(cells.len(), size * size, "ego map size mismatch");
        Self { size, cells }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn center(&self) -> Cell {
        Cell::new((self.size / 2) as i32, (self.size / 2) as i32)
    }

    pub fn get(&self, c: Cell) -> SemanticCell {
        if c.x < 0 || c.y < 0 || c.x as usize >= self.size || c.y as usize >= self.size {
            SemanticCell::Unknown
        } else {
            self.cells[c.y as usize * self.size + c.x as usize]
        }
    }

    pub fn cells(&self) -> &[SemanticCell] {
        &self.cells
    }

    /// Run-length encoding: `<count><char>` pairs over the row-major codes.
    pub fn to_rle(&self) -> String {
        let mut out = String::new();
        let mut iter = self.cells.iter().map(|c| c.code());
        let Some(mut current) = iter.next() else {
            return out;
        };
        let mut run = 1usize;
        for ch in iter {
            if ch == current {
                run += 1;
            } else {
                out.push_str(&run.to_string());
                out.push(current);
                current = ch;
                run = 1;
            }
        }
        out.push_str(&run.to_string());
        out.push(current);
        out
    }

    pub fn from_rle(rle: &str, size: usize) -> Result<Self, String> {
        let mut cells = Vec::with_capacity(size * size);
        let mut count = String::new();
        for ch in rle.chars() {
            if ch.is_ascii_digit() {
                count.push(ch);
                continue;
            }
            let cell = SemanticCell::from_code(ch).ok_or_else(|| format!("bad cell code {ch:?}"))?;
            let n: usize = count.parse().map_err(|_| format!("missing run length before {ch:?}"))?;
            if n == 0 || cells.len() + n > size * size {
                return Err("run lengths do not match map size".into());
            }
            cells.extend(std::iter::repeat_n(cell, n));
            count.clear();
        }
        if !count.is_empty() || cells.len() != size * size {
            return Err(format!("decoded {} cells, expected {}", cells.len(), size * size));
        }
        Ok(Self { size, cells })
    }
}

/// Classifies the map, labels frontiers on the full map, then crops around
/// the reported agent cell. The crop translates with the agent but does not
/// rotate.
pub fn extract_egocentric<L: LogOdds, S: Real>(map: &ProbMap<L>, reported_pose: &Pose2<S>, size: usize) -> EgoSemanticMap {
    let view = SemanticView::from_map(map);
    view.crop(map.world_to_map(reported_pose.x, reported_pose.y), size)
}
