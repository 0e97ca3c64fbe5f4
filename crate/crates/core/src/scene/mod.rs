//! Ground-truth worlds: loading, saving, procedural generation and the
//! derived products used by episodes (surface cells, start region).

mod floorplan;
mod surface;

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use thiserror::Error;

use crate::geometry::Cell;

pub use floorplan::{generate_floorplan, Floorplan, FloorplanConfig, Room};
pub use surface::{ground_truth_surface, sample_start_pose, GroundTruthSurface, StartRegion};

/// First token of the scene file header.
pub const SCENE_MAGIC: &str = "GLEAMGRID";
pub const DEFAULT_CELL_SIZE: f64 = 0.1;

#[derive(Debug, Error)]
pub enum SceneError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("non-watertight border: free cell at ({}, {})", .0.x, .0.y)]
    NotWatertight(Cell),
    #[error("scene has no free cells")]
    NoFreeCells,
    #[error("free region is not 4-connected ({components} components)")]
    Disconnected { components: usize },
    #[error("infeasible floorplan config: {0}")]
    Infeasible(String),
    #[error("start region is empty")]
    EmptyStartRegion,
}

/// Immutable ground-truth occupancy of a world.
#[derive(Clone, Debug, PartialEq)]
pub struct SceneGrid {
    width: usize,
    height: usize,
    cell_size: f64,
    occupied: Vec<bool>,
    name: String,
    seed: u64,
}

impl SceneGrid {
    /// Builds and validates a scene from a row-major occupancy mask.
    pub fn from_mask(
        width: usize,
        height: usize,
        cell_size: f64,
        occupied: Vec<bool>,
        name: impl Into<String>,
        seed: u64,
    ) -> Result<Self, SceneError> {
        assert_eq!(occupied.len(), width * height, "mask size mismatch");
        let scene = Self {
            width,
            height,
            cell_size,
            occupied,
            name: name.into(),
            seed,
        };
        scene.validate()?;
        Ok(scene)
    }

    /// Parses an ASCII picture, one string per row (row 0 first).
    pub fn from_rows(rows: &[&str], cell_size: f64, name: &str) -> Result<Self, SceneError> {
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.len());
        let mut occupied = Vec::with_capacity(width * height);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(SceneError::Parse {
                    line: i + 1,
                    msg: format!("expected {width} columns, found {}", row.len()),
                });
            }
            for ch in row.chars() {
                occupied.push(parse_cell(ch, i + 1)?);
            }
        }
        Self::from_mask(width, height, cell_size, occupied, name, 0)
    }

    /// Empty rectangular room: border walls, free interior.
    pub fn empty_room(width: usize, height: usize, cell_size: f64) -> Self {
        let mut occupied = vec![false; width * height];
        for y in 0..height {
            for x in 0..width {
                occupied[y * width + x] = x == 0 || y == 0 || x + 1 == width || y + 1 == height;
            }
        }
        Self::from_mask(width, height, cell_size, occupied, format!("room{width}x{height}"), 0)
            .expect("empty room is a valid scene")
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn cell_size(&self) -> f64 {
        self.cell_size
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    /// Out-of-bounds cells count as occupied.
    pub fn is_occupied(&self, c: Cell) -> bool {
        !self.in_bounds(c) || self.occupied[c.y as usize * self.width + c.x as usize]
    }

    pub fn is_free(&self, c: Cell) -> bool {
        !self.is_occupied(c)
    }

    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.height)
            .flat_map(move |y| (0..self.width).map(move |x| Cell::new(x as i32, y as i32)))
    }

    pub fn free_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        self.cells().filter(|c| self.is_free(*c))
    }

    pub fn free_count(&self) -> usize {
        self.occupied.iter().filter(|o| !**o).count()
    }

    pub fn occupancy_mask(&self) -> &[bool] {
        &self.occupied
    }

    fn validate(&self) -> Result<(), SceneError> {
        for c in self.cells() {
            let on_border = c.x == 0
                || c.y == 0
                || c.x as usize + 1 == self.width
                || c.y as usize + 1 == self.height;
            if on_border && self.is_free(c) {
                return Err(SceneError::NotWatertight(c));
            }
        }
        if self.free_count() == 0 {
            return Err(SceneError::NoFreeCells);
        }
        let components = self.free_components();
        if components > 1 {
            return Err(SceneError::Disconnected { components });
        }
        Ok(())
    }

    /// Number of 4-connected components of the free region.
    pub fn free_components(&self) -> usize {
        let mut seen = vec![false; self.width * self.height];
        let mut components = 0;
        for start in self.free_cells() {
            let idx = start.y as usize * self.width + start.x as usize;
            if seen[idx] {
                continue;
            }
            components += 1;
            seen[idx] = true;
            let mut queue = VecDeque::from([start]);
            while let Some(c) = queue.pop_front() {
                for n in c.neighbors4() {
                    if self.is_free(n) {
                        let ni = n.y as usize * self.width + n.x as usize;
                        if !seen[ni] {
                            seen[ni] = true;
                            queue.push_back(n);
                        }
                    }
                }
            }
        }
        components
    }

    /// Serializes into the scene file format.
    pub fn to_text(&self) -> String {
        let mut out = String::with_capacity((self.width + 1) * (self.height + 1) + 64);
        writeln!(
            out,
            "{SCENE_MAGIC} v1 width={} height={} cell_size={}",
            self.width, self.height, self.cell_size
        )
        .expect("write to string");
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(if self.occupied[y * self.width + x] { '#' } else { '.' });
            }
            out.push('\n');
        }
        out
    }

    /// Parses the scene file format.
    pub fn parse(text: &str, name: &str) -> Result<Self, SceneError> {
        if !text.ends_with('\n') {
            return Err(SceneError::Parse {
                line: text.lines().count().max(1),
                msg: "missing trailing newline".into(),
            });
        }
        let mut lines = text.lines();
        let header = lines.next().ok_or_else(|| SceneError::Parse {
            line: 1,
            msg: "empty file".into(),
        })?;
        let (width, height, cell_size) = parse_header(header)?;
        let mut occupied = Vec::with_capacity(width * height);
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            if rows == height {
                return Err(SceneError::Parse {
                    line: lineno,
                    msg: format!("more than {height} rows"),
                });
            }
            if line.chars().count() != width {
                return Err(SceneError::Parse {
                    line: lineno,
                    msg: format!("expected {width} columns, found {}", line.chars().count()),
                });
            }
            for ch in line.chars() {
                occupied.push(parse_cell(ch, lineno)?);
            }
            rows += 1;
        }
        if rows != height {
            return Err(SceneError::Parse {
                line: rows + 1,
                msg: format!("expected {height} rows, found {rows}"),
            });
        }
        Self::from_mask(width, height, cell_size, occupied, name, 0)
    }
}

fn parse_cell(ch: char, line: usize) -> Result<bool, SceneError> {
    match ch {
        '#' => Ok(true),
        '.' => Ok(false),
        other => Err(SceneError::Parse {
            line,
            msg: format!("unexpected character {other:?}"),
        }),
    }
}

fn parse_header(header: &str) -> Result<(usize, usize, f64), SceneError> {
    let err = |msg: String| SceneError::Parse { line: 1, msg };
    let mut tokens = header.split_whitespace();
    if tokens.next() != Some(SCENE_MAGIC) || tokens.next() != Some("v1") {
        return Err(err(format!("expected '{SCENE_MAGIC} v1' header")));
    }
    let mut width = None;
    let mut height = None;
    let mut cell_size = None;
    for tok in tokens {
        let (key, value) = tok
            .split_once('=')
            .ok_or_else(|| err(format!("malformed header field {tok:?}")))?;
        let invalid = || err(format!("invalid value for {key}: {value:?}"));
        match key {
            "width" => width = Some(value.parse::<usize>().map_err(|_| invalid())?),
            "height" => height = Some(value.parse::<usize>().map_err(|_| invalid())?),
            "cell_size" => {
                let cs = value.parse::<f64>().map_err(|_| invalid())?;
                if !(cs > 0.0 && cs.is_finite()) {
                    return Err(invalid());
                }
                cell_size = Some(cs);
            }
            _ => return Err(err(format!("unknown header field {key:?}"))),
        }
    }
    match (width, height, cell_size) {
        (Some(w), Some(h), Some(cs)) if w >= 3 && h >= 3 => Ok((w, h, cs)),
        (Some(_), Some(_), Some(_)) => Err(err("grid must be at least 3x3".into())),
        _ => Err(err("header requires width, height and cell_size".into())),
    }
}

/// Reads a scene file. The scene name is the file stem.
pub fn load_scene(path: impl AsRef<Path>) -> Result<SceneGrid, SceneError> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "scene".into());
    SceneGrid::parse(&text, &name)
}

pub fn save_scene(scene: &SceneGrid, path: impl AsRef<Path>) -> Result<(), SceneError> {
    let path = path.as_ref();
    std::fs::write(path, scene.to_text()).map_err(|source| SceneError::Io {
        path: path.display().to_string(),
        source,
    })
}
