//! Independent reference implementations used as test oracles. Each one is
//! written the slow, obvious way and shares no code with the library beyond
//! plain data types.
#![allow(dead_code)]

use std::collections::BTreeSet;

use activemap::geometry::Cell;
use activemap::mapping::{TriGrid, TriState};
use activemap::scene::SceneGrid;
use rand::Rng;

/// Line between two cells by exhaustive search: for every major-axis step,
/// the minor coordinate whose center is closest to the ideal line, ties going
/// away from the lexicographically smaller endpoint. Returned from `a` to `b`.
pub fn line_oracle(a: Cell, b: Cell) -> Vec<Cell> {
    let (s, e) = if (a.x, a.y) <= (b.x, b.y) { (a, b) } else { (b, a) };
    let (dx, dy) = (e.x - s.x, e.y - s.y);
    let x_major = dx.abs() >= dy.abs();
    let (dmaj, dmin) = if x_major { (dx, dy) } else { (dy, dx) };
    let n = dmaj.abs();
    let mut cells = Vec::new();
    for t in 0..=n {
        // ideal minor offset is t * |dmin| / n; compare |m*n - t*|dmin|| over candidates
        let mut best: Option<(i64, i32)> = None;
        for m in 0..=dmin.abs() {
            let err = (m as i64 * n as i64 - t as i64 * dmin.abs() as i64).abs();
            if best.is_none_or(|(be, _)| err <= be) {
                best = Some((err, m));
            }
        }
        let m = best.map_or(0, |(_, m)| m);
        let (major, minor) = (t * dmaj.signum(), m * dmin.signum());
        cells.push(if x_major { s.offset(major, minor) } else { s.offset(minor, major) });
    }
    if (a.x, a.y) > (b.x, b.y) {
        cells.reverse();
    }
    cells
}

/// Shortest 8-connected path costs from `start` as `(orthogonal, diagonal)`
/// counts, by textbook O(V²) Dijkstra. Diagonals need both side cells free.
pub fn dijkstra_oracle(tri: &TriGrid, start: Cell) -> Vec<Option<(u32, u32)>> {
    let (w, h) = (tri.width(), tri.height());
    let free = |c: Cell| c.x >= 0 && c.y >= 0 && (c.x as usize) < w && (c.y as usize) < h && tri.get(c) == TriState::Free;
    let len = |c: (u32, u32)| c.0 as f64 + c.1 as f64 * std::f64::consts::SQRT_2;
    let mut dist: Vec<Option<(u32, u32)>> = vec![None; w * h];
    let mut done = vec![false; w * h];
    if !free(start) {
        return dist;
    }
    dist[start.y as usize * w + start.x as usize] = Some((0, 0));
    loop {
        let mut pick: Option<usize> = None;
        for i in 0..w * h {
            if done[i] {
                continue;
            }
            if let Some(d) = dist[i] {
                if pick.is_none_or(|p| len(d) < len(dist[p].unwrap())) {
                    pick = Some(i);
                }
            }
        }
        let Some(i) = pick else { break };
        done[i] = true;
        let c = Cell::new((i % w) as i32, (i / w) as i32);
        let d = dist[i].unwrap();
        for dy in -1..=1 {
            for dx in -1..=1 {
                if (dx, dy) == (0, 0) {
                    continue;
                }
                let n = c.offset(dx, dy);
                let diagonal = dx != 0 && dy != 0;
                if !free(n) || (diagonal && !(free(c.offset(dx, 0)) && free(c.offset(0, dy)))) {
                    continue;
                }
                let nd = if diagonal { (d.0, d.1 + 1) } else { (d.0 + 1, d.1) };
                let ni = n.y as usize * w + n.x as usize;
                if dist[ni].is_none_or(|old| len(nd) < len(old)) {
                    dist[ni] = Some(nd);
                }
            }
        }
    }
    dist
}

/// Free cells with an Unknown 4-neighbor, by scanning every cell.
pub fn frontier_oracle(tri: &TriGrid) -> BTreeSet<Cell> {
    let mut out = BTreeSet::new();
    for y in 0..tri.height() as i32 {
        for x in 0..tri.width() as i32 {
            let c = Cell::new(x, y);
            if tri.get(c) != TriState::Free {
                continue;
            }
            for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
                let n = c.offset(dx, dy);
                if tri.in_bounds(n) && tri.get(n) == TriState::Unknown {
                    out.insert(c);
                }
            }
        }
    }
    out
}

pub fn random_tri<R: Rng>(rng: &mut R, w: usize, h: usize, p_free: f64, p_occ: f64) -> TriGrid {
    let cells = (0..w * h)
        .map(|_| {
            let u: f64 = rng.random();
            if u < p_free {
                TriState::Free
            } else if u < p_free + p_occ {
                TriState::Occupied
            } else {
                TriState::Unknown
            }
        })
        .collect();
    TriGrid::from_cells(w, h, cells)
}

/// Perfect maze by randomized depth-first carving on odd cells, then a few
/// extra walls knocked out so that shortest paths are not unique.
pub fn maze<R: Rng>(rng: &mut R, size: usize) -> TriGrid {
    let mut tri = TriGrid::new(size, size, TriState::Occupied);
    let mut stack = vec![Cell::new(1, 1)];
    tri.set(Cell::new(1, 1), TriState::Free);
    while let Some(&c) = stack.last() {
        let options: Vec<(i32, i32)> = [(2, 0), (-2, 0), (0, 2), (0, -2)]
            .into_iter()
            .filter(|&(dx, dy)| {
                let n = c.offset(dx, dy);
                n.x > 0 && n.y > 0 && (n.x as usize) < size - 1 && (n.y as usize) < size - 1 && tri.get(n) == TriState::Occupied
            })
            .collect();
        if options.is_empty() {
            stack.pop();
            continue;
        }
        let (dx, dy) = options[rng.random_range(0..options.len())];
        tri.set(c.offset(dx / 2, dy / 2), TriState::Free);
        tri.set(c.offset(dx, dy), TriState::Free);
        stack.push(c.offset(dx, dy));
    }
    for _ in 0..size * size / 20 {
        let c = Cell::new(rng.random_range(1..size as i32 - 1), rng.random_range(1..size as i32 - 1));
        tri.set(c, TriState::Free);
    }
    tri
}

/// Surface cells of `scene` visible from `(x, y)` within `max_range`: some
/// point on a face shared with a free cell is reachable by a straight segment
/// that stays in free cells. Faces are sampled away from their corners.
pub fn line_of_sight_oracle(scene: &SceneGrid, x: f64, y: f64, max_range: f64) -> BTreeSet<Cell> {
    let cs = scene.cell_size();
    let mut out = BTreeSet::new();
    for c in scene.cells() {
        if !scene.is_occupied(c) {
            continue;
        }
        let (x0, y0) = (c.x as f64 * cs, c.y as f64 * cs);
        let faces = [
            ((0, -1), (x0, y0), (x0 + cs, y0)),
            ((0, 1), (x0, y0 + cs), (x0 + cs, y0 + cs)),
            ((-1, 0), (x0, y0), (x0, y0 + cs)),
            ((1, 0), (x0 + cs, y0), (x0 + cs, y0 + cs)),
        ];
        'faces: for ((nx, ny), (ax, ay), (bx, by)) in faces {
            if !scene.is_free(c.offset(nx, ny)) {
                continue;
            }
            for k in 1..20 {
                let f = k as f64 / 20.0;
                let (px, py) = (ax + (bx - ax) * f, ay + (by - ay) * f);
                let d = (px - x).hypot(py - y);
                if d > max_range || !segment_clear(scene, x, y, px, py, c) {
                    continue;
                }
                out.insert(c);
                break 'faces;
            }
        }
    }
    out
}

fn segment_clear(scene: &SceneGrid, x: f64, y: f64, px: f64, py: f64, target: Cell) -> bool {
    let cs = scene.cell_size();
    let d = (px - x).hypot(py - y);
    let n = (d / (cs * 0.01)).ceil() as usize + 1;
    (0..n).all(|i| {
        let f = i as f64 / n as f64;
        let c = Cell::new(((x + (px - x) * f) / cs).floor() as i32, ((y + (py - y) * f) / cs).floor() as i32);
        c == target || scene.is_free(c)
    })
}
