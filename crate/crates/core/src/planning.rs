//! A* over the tri-state map and navigability checks for long-term goals.
//!
//! Only Free cells are traversable. Moves are 8-connected with unit cost for
//! orthogonal and √2 for diagonal steps; a diagonal step is allowed only when
//! both orthogonally adjacent cells are Free.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use crate::geometry::Cell;
use crate::mapping::TriGrid;

/// Default path-length threshold in meters.
pub const DEFAULT_MAX_PATH_LENGTH: f64 = 12.8;

/// Path cost as a count of orthogonal and diagonal steps. Distinct counts
/// never have equal lengths, so comparing the counts is exact.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PathCost {
    pub orthogonal: u32,
    pub diagonal: u32,
}

impl PathCost {
    /// Length in cells.
    pub fn cells(&self) -> f64 {
        self.orthogonal as f64 + self.diagonal as f64 * std::f64::consts::SQRT_2
    }

    pub fn meters(&self, cell_size: f64) -> f64 {
        self.cells() * cell_size
    }

    fn step(self, diagonal: bool) -> Self {
        if diagonal {
            Self { diagonal: self.diagonal + 1, ..self }
        } else {
            Self { orthogonal: self.orthogonal + 1, ..self }
        }
    }
}

impl Ord for PathCost {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            Ordering::Equal
        } else {
            self.cells().total_cmp(&other.cells())
        }
    }
}

impl PartialOrd for PathCost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlanResult {
    /// Cells from start to goal inclusive.
    pub path: Vec<Cell>,
    pub cost: PathCost,
    /// Length in meters.
    pub length: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Unnavigable {
    InvalidStart,
    NotFree,
    NoPath,
    TooLong,
}

const STEPS: [(i32, i32); 8] = [(1, 0), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)];

/// Successors of `c` that satisfy the traversability and corner rules.
pub fn successors(tri: &TriGrid, c: Cell) -> impl Iterator<Item = (Cell, bool)> + '_ {
    STEPS.iter().filter_map(move |&(dx, dy)| {
        let n = c.offset(dx, dy);
        let diagonal = dx != 0 && dy != 0;
        let ok = tri.is_free(n) && (!diagonal || (tri.is_free(c.offset(dx, 0)) && tri.is_free(c.offset(0, dy))));
        ok.then_some((n, diagonal))
    })
}

#[derive(Clone, Copy, Debug)]
struct OpenEntry {
    f: f64,
    h: f64,
    cell: Cell,
    cost: PathCost,
}

impl PartialEq for OpenEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for OpenEntry {}

impl Ord for OpenEntry {
    // reversed: BinaryHeap pops the maximum
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .f
            .total_cmp(&self.f)
            .then_with(|| other.h.total_cmp(&self.h))
            .then_with(|| other.cell.cmp(&self.cell))
            .then_with(|| other.cost.cmp(&self.cost))
    }
}

impl PartialOrd for OpenEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Minimum-length Free-only path from `start` to `goal`.
///
/// Ties among equal f-scores pop the lower heuristic first, then the lower
/// `(y, x)` cell. Fails with `TooLong` when the optimal length exceeds
/// `max_length` meters.
pub fn astar(
    tri: &TriGrid,
    start: Cell,
    goal: Cell,
    cell_size: f64,
    max_length: f64,
) -> Result<PlanResult, Unnavigable> {
    if !tri.is_free(start) {
        return Err(Unnavigable::InvalidStart);
    }
    if !tri.is_free(goal) {
        return Err(Unnavigable::NoPath);
    }
    let n = tri.width() * tri.height();
    let idx = |c: Cell| tri.index(c).expect("free cells are inside the grid");
    let mut best: Vec<Option<PathCost>> = vec![None; n];
    let mut parent: Vec<u32> = vec![u32::MAX; n];
    let heuristic = |c: Cell| c.distance(goal);
    let mut open = BinaryHeap::new();
    best[idx(start)] = Some(PathCost::default());
    let h0 = heuristic(start);
    open.push(OpenEntry { f: h0, h: h0, cell: start, cost: PathCost::default() });

    while let Some(entry) = open.pop() {
        let ci = idx(entry.cell);
        if best[ci] != Some(entry.cost) {
            continue;
        }
        if entry.cell == goal {
            let mut path = vec![goal];
            let mut cur = ci;
            while parent[cur] != u32::MAX {
                cur = parent[cur] as usize;
                path.push(tri.cell_at(cur));
            }
            path.reverse();
            let length = entry.cost.meters(cell_size);
            if length > max_length + 1e-9 {
                return Err(Unnavigable::TooLong);
            }
            return Ok(PlanResult { path, cost: entry.cost, length });
        }
        for (next, diagonal) in successors(tri, entry.cell) {
            let ni = idx(next);
            let cost = entry.cost.step(diagonal);
            if best[ni].is_none_or(|b| cost < b) {
                best[ni] = Some(cost);
                parent[ni] = ci as u32;
                let h = heuristic(next);
                open.push(OpenEntry { f: cost.cells() + h, h, cell: next, cost });
            }
        }
    }
    Err(Unnavigable::NoPath)
}

/// Navigable iff the goal is Free and A* finds a path within `max_length`.
pub fn is_navigable(
    tri: &TriGrid,
    start: Cell,
    goal: Cell,
    cell_size: f64,
    max_length: f64,
) -> Result<PlanResult, Unnavigable> {
    if !tri.is_free(start) {
        return Err(Unnavigable::InvalidStart);
    }
    if !tri.is_free(goal) {
        return Err(Unnavigable::NotFree);
    }
    astar(tri, start, goal, cell_size, max_length)
}

/// Optimal path cost from `start` to every reachable Free cell (Dijkstra with
/// the same move model as [`astar`]). Indexed row-major.
pub fn distance_field(tri: &TriGrid, start: Cell) -> Vec<Option<PathCost>> {
    let n = tri.width() * tri.height();
    let mut best: Vec<Option<PathCost>> = vec![None; n];
    let Some(si) = tri.index(start).filter(|_| tri.is_free(start)) else {
        return best;
    };
    best[si] = Some(PathCost::default());
    let mut open = BinaryHeap::new();
    open.push(OpenEntry { f: 0.0, h: 0.0, cell: start, cost: PathCost::default() });
    while let Some(entry) = open.pop() {
        let ci = tri.index(entry.cell).expect("inside grid");
        if best[ci] != Some(entry.cost) {
            continue;
        }
        for (next, diagonal) in successors(tri, entry.cell) {
            let ni = tri.index(next).expect("inside grid");
            let cost = entry.cost.step(diagonal);
            if best[ni].is_none_or(|b| cost < b) {
                best[ni] = Some(cost);
                open.push(OpenEntry { f: cost.cells(), h: 0.0, cell: next, cost });
            }
        }
    }
    best
}
