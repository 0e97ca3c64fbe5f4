//! Procedural floorplans: axis-aligned BSP room splitting, door carving and
//! rectangular clutter.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{SceneError, SceneGrid, DEFAULT_CELL_SIZE};
use crate::geometry::Cell;
use crate::rng::{rng_from, SimRng};

/// Smallest interior side of a room, in cells.
const MIN_ROOM_SIDE: i32 = 6;
const MAX_LAYOUT_ATTEMPTS: usize = 64;
const CLUTTER_ATTEMPTS_PER_ROOM: usize = 200;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FloorplanConfig {
    pub room_count: usize,
    /// Cells per side of the square scene.
    pub target_extent: usize,
    /// Fraction of each room interior covered by obstacles, in `[0, 0.3]`.
    pub clutter_density: f64,
    pub door_width: usize,
    pub seed: u64,
    pub cell_size: f64,
}

impl Default for FloorplanConfig {
    fn default() -> Self {
        Self {
            room_count: 4,
            target_extent: 64,
            clutter_density: 0.1,
            door_width: 2,
            seed: 0,
            cell_size: DEFAULT_CELL_SIZE,
        }
    }
}

/// Inclusive rectangle of free interior cells.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Room {
    pub x0: i32,
    pub y0: i32,
    pub x1: i32,
    pub y1: i32,
}

impl Room {
    fn width(&self) -> i32 {
        self.x1 - self.x0 + 1
    }

    fn height(&self) -> i32 {
        self.y1 - self.y0 + 1
    }

    pub fn area(&self) -> usize {
        (self.width() * self.height()) as usize
    }

    pub fn contains(&self, c: Cell) -> bool {
        c.x >= self.x0 && c.x <= self.x1 && c.y >= self.y0 && c.y <= self.y1
    }
}

#[derive(Clone, Copy, Debug)]
struct Wall {
    vertical: bool,
    /// Column (vertical) or row (horizontal) occupied by the wall.
    at: i32,
    lo: i32,
    hi: i32,
}

/// A generated scene together with its layout.
#[derive(Clone, Debug)]
pub struct Floorplan {
    pub scene: SceneGrid,
    pub rooms: Vec<Room>,
    pub doors: Vec<Vec<Cell>>,
}

/// Generates a scene; a pure function of `config`.
pub fn generate_floorplan(config: &FloorplanConfig) -> Result<SceneGrid, SceneError> {
    Floorplan::generate(config).map(|fp| fp.scene)
}

impl Floorplan {
    pub fn generate(config: &FloorplanConfig) -> Result<Self, SceneError> {
        check_config(config)?;
        let mut rng = rng_from(config.seed, &["floorplan".into()]);
        for _ in 0..MAX_LAYOUT_ATTEMPTS {
            if let Some(plan) = try_layout(config, &mut rng)? {
                return Ok(plan);
            }
        }
        Err(SceneError::Infeasible(format!(
            "no door layout found after {MAX_LAYOUT_ATTEMPTS} attempts"
        )))
    }
}

fn check_config(config: &FloorplanConfig) -> Result<(), SceneError> {
    if config.room_count == 0 {
        return Err(SceneError::Infeasible("room_count must be at least 1".into()));
    }
    let needed = 16.0 * (config.room_count as f64).sqrt();
    if (config.target_extent as f64) < needed {
        return Err(SceneError::Infeasible(format!(
            "extent {} < 16*sqrt({}) = {needed:.1}",
            config.target_extent, config.room_count
        )));
    }
    if !(0.0..=0.3).contains(&config.clutter_density) {
        return Err(SceneError::Infeasible("clutter_density outside [0, 0.3]".into()));
    }
    if config.door_width < 2 || config.door_width as i32 > MIN_ROOM_SIDE - 2 {
        return Err(SceneError::Infeasible(format!(
            "door_width must be in [2, {}]",
            MIN_ROOM_SIDE - 2
        )));
    }
    if !(config.cell_size > 0.0 && config.cell_size.is_finite()) {
        return Err(SceneError::Infeasible("cell_size must be positive".into()));
    }
    Ok(())
}

struct Grid {
    extent: i32,
    occupied: Vec<bool>,
}

impl Grid {
    fn idx(&self, c: Cell) -> usize {
        (c.y * self.extent + c.x) as usize
    }

    fn get(&self, c: Cell) -> bool {
        self.occupied[self.idx(c)]
    }

    fn set(&mut self, c: Cell, occ: bool) {
        let i = self.idx(c);
        self.occupied[i] = occ;
    }

    fn free_connected(&self) -> bool {
        let n = self.occupied.len();
        let Some(start) = (0..n).find(|i| !self.occupied[*i]) else {
            return false;
        };
        let mut seen = vec![false; n];
        seen[start] = true;
        let mut stack = vec![start];
        let mut reached = 1;
        let e = self.extent as usize;
        while let Some(i) = stack.pop() {
            let (x, y) = (i % e, i / e);
            let mut visit = |j: usize| {
                if !self.occupied[j] && !seen[j] {
                    seen[j] = true;
                    reached += 1;
                    stack.push(j);
                }
            };
            if x > 0 {
                visit(i - 1);
            }
            if x + 1 < e {
                visit(i + 1);
            }
            if y > 0 {
                visit(i - e);
            }
            if y + 1 < e {
                visit(i + e);
            }
        }
        reached == self.occupied.iter().filter(|o| !**o).count()
    }
}

fn split_room(room: Room, rng: &mut SimRng) -> Option<(Room, Room, Wall)> {
    let min_span = 2 * MIN_ROOM_SIDE + 1;
    let can_x = room.width() >= min_span;
    let can_y = room.height() >= min_span;
    let vertical = match (can_x, can_y) {
        (false, false) => return None,
        (true, false) => true,
        (false, true) => false,
        (true, true) => room.width() >= room.height(),
    };
    let (lo, hi) = if vertical { (room.x0, room.x1) } else { (room.y0, room.y1) };
    let span = hi - lo + 1;
    // keep splits away from the extremes so rooms stay reasonably proportioned
    let margin = MIN_ROOM_SIDE.max(span * 3 / 10);
    let first = lo + margin;
    let last = hi - margin;
    let at = if first >= last { lo + span / 2 } else { rng.random_range(first..=last) };
    Some(if vertical {
        (
            Room { x1: at - 1, ..room },
            Room { x0: at + 1, ..room },
            Wall { vertical, at, lo: room.y0, hi: room.y1 },
        )
    } else {
        (
            Room { y1: at - 1, ..room },
            Room { y0: at + 1, ..room },
            Wall { vertical, at, lo: room.x0, hi: room.x1 },
        )
    })
}

fn try_layout(config: &FloorplanConfig, rng: &mut SimRng) -> Result<Option<Floorplan>, SceneError> {
    let extent = config.target_extent as i32;
    let mut rooms = vec![Room { x0: 1, y0: 1, x1: extent - 2, y1: extent - 2 }];
    let mut walls = Vec::new();
    while rooms.len() < config.room_count {
        // split the largest splittable room; ties resolve to the earliest index
        let mut order: Vec<usize> = (0..rooms.len()).collect();
        order.sort_by_key(|i| std::cmp::Reverse(rooms[*i].area()));
        let mut split = None;
        for i in order {
            if let Some(parts) = split_room(rooms[i], rng) {
                split = Some((i, parts));
                break;
            }
        }
        let Some((i, (a, b, wall))) = split else {
            return Err(SceneError::Infeasible(format!(
                "cannot pack {} rooms into extent {extent}",
                config.room_count
            )));
        };
        rooms[i] = a;
        rooms.push(b);
        walls.push(wall);
    }

    let mut grid = Grid {
        extent,
        occupied: vec![true; (extent * extent) as usize],
    };
    for room in &rooms {
        for y in room.y0..=room.y1 {
            for x in room.x0..=room.x1 {
                grid.set(Cell::new(x, y), false);
            }
        }
    }

    let dw = config.door_width as i32;
    let mut doors = Vec::with_capacity(walls.len());
    for wall in &walls {
        let cell_at = |t: i32, side: i32| {
            if wall.vertical {
                Cell::new(wall.at + side, t)
            } else {
                Cell::new(t, wall.at + side)
            }
        };
        let candidates: Vec<i32> = (wall.lo..=wall.hi - dw + 1)
            .filter(|p| (0..dw).all(|k| !grid.get(cell_at(p + k, -1)) && !grid.get(cell_at(p + k, 1))))
            .collect();
        if candidates.is_empty() {
            return Ok(None);
        }
        let p = candidates[rng.random_range(0..candidates.len())];
        let door: Vec<Cell> = (0..dw).map(|k| cell_at(p + k, 0)).collect();
        for c in &door {
            grid.set(*c, false);
        }
        doors.push(door);
    }

    if config.clutter_density > 0.0 {
        for room in &rooms {
            add_clutter(&mut grid, room, config.clutter_density, rng);
        }
    }

    let name = format!(
        "fp_r{}_e{}_c{}_s{}",
        config.room_count, config.target_extent, config.clutter_density, config.seed
    );
    let scene = SceneGrid::from_mask(
        extent as usize,
        extent as usize,
        config.cell_size,
        grid.occupied,
        name,
        config.seed,
    )?;
    Ok(Some(Floorplan { scene, rooms, doors }))
}

fn add_clutter(grid: &mut Grid, room: &Room, density: f64, rng: &mut SimRng) {
    // obstacles keep one free cell of clearance from the room walls
    let (ix0, iy0, ix1, iy1) = (room.x0 + 1, room.y0 + 1, room.x1 - 1, room.y1 - 1);
    if ix1 - ix0 < 2 || iy1 - iy0 < 2 {
        return;
    }
    let target = (density * room.area() as f64).round() as usize;
    let max_side = ((room.width().min(room.height())) / 3).max(1);
    let mut filled = 0usize;
    for _ in 0..CLUTTER_ATTEMPTS_PER_ROOM {
        if filled >= target {
            break;
        }
        let w = rng.random_range(1..=max_side);
        let h = rng.random_range(1..=max_side);
        if ix0 + w - 1 > ix1 || iy0 + h - 1 > iy1 {
            continue;
        }
        let x = rng.random_range(ix0..=ix1 - w + 1);
        let y = rng.random_range(iy0..=iy1 - h + 1);
        let cells: Vec<Cell> = (y..y + h)
            .flat_map(|yy| (x..x + w).map(move |xx| Cell::new(xx, yy)))
            .filter(|c| !grid.get(*c))
            .collect();
        if cells.is_empty() || filled + cells.len() > target + target / 4 + 1 {
            continue;
        }
        for c in &cells {
            grid.set(*c, true);
        }
        if grid.free_connected() {
            filled += cells.len();
        } else {
            for c in &cells {
                grid.set(*c, false);
            }
        }
    }
}
