//! Grid cells, SE(2) poses and relative long-term actions.

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

/// Integer grid coordinate. Ordered row-major: by `y`, then `x`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub x: i32,
    pub y: i32,
}

impl Cell {
    pub const fn new(x: i32, y: i32) -> Self {
        Self { x, y }
    }

    pub fn offset(self, dx: i32, dy: i32) -> Self {
        Self::new(self.x + dx, self.y + dy)
    }

    pub fn neighbors4(self) -> [Cell; 4] {
        [
            self.offset(1, 0),
            self.offset(-1, 0),
            self.offset(0, 1),
            self.offset(0, -1),
        ]
    }

    pub fn neighbors8(self) -> [Cell; 8] {
        [
            self.offset(-1, -1),
            self.offset(0, -1),
            self.offset(1, -1),
            self.offset(-1, 0),
            self.offset(1, 0),
            self.offset(-1, 1),
            self.offset(0, 1),
            self.offset(1, 1),
        ]
    }

    /// Center of this cell in world meters.
    pub fn center<S: Real>(self, cell_size: S) -> (S, S) {
        let half = S::lit(0.5);
        (
            (S::lit(self.x as f64) + half) * cell_size,
            (S::lit(self.y as f64) + half) * cell_size,
        )
    }

    /// Cell containing the world point `(x, y)`.
    pub fn containing<S: Real>(x: S, y: S, cell_size: S) -> Self {
        Self::new(
            (x / cell_size).floor().as_f64() as i32,
            (y / cell_size).floor().as_f64() as i32,
        )
    }

    /// Euclidean distance between cell centers, in cells.
    pub fn distance(self, other: Cell) -> f64 {
        let dx = (self.x - other.x) as f64;
        let dy = (self.y - other.y) as f64;
        dx.hypot(dy)
    }
}

impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.y, self.x).cmp(&(other.y, other.x))
    }
}

impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Wraps an angle into `[0, 2π)`.
pub fn wrap_positive<S: Real>(theta: S) -> S {
    let two_pi = S::TAU();
    let mut t = theta % two_pi;
    if t < S::zero() {
        t = t + two_pi;
    }
    if t >= two_pi {
        t = t - two_pi;
    }
    t
}

/// Wraps an angle into `(-π, π]`.
pub fn wrap_signed<S: Real>(theta: S) -> S {
    let t = wrap_positive(theta);
    if t > S::PI() {
        t - S::TAU()
    } else {
        t
    }
}

/// Cells crossed by a ray from `(x, y)`, in order, with the distance at
/// which each is entered (0 for the starting cell). Cell-by-cell traversal
/// after Amanatides and Woo; a ray passing exactly through a cell corner
/// steps diagonally. The walk is unbounded.
#[derive(Clone, Debug)]
pub struct RayWalk<S> {
    cell: Cell,
    step_x: i32,
    step_y: i32,
    t_max_x: S,
    t_max_y: S,
    t_delta_x: S,
    t_delta_y: S,
    started: bool,
}

impl<S: Real> RayWalk<S> {
    pub fn new(x: S, y: S, angle: S, cell_size: S) -> Self {
        let cell = Cell::containing(x, y, cell_size);
        let (dir_y, dir_x) = angle.sin_cos();
        let axis = |pos: S, dir: S, idx: i32| -> (i32, S, S) {
            if dir > S::zero() {
                let boundary = S::lit((idx + 1) as f64) * cell_size;
                (1, (boundary - pos) / dir, cell_size / dir)
            } else if dir < S::zero() {
                let boundary = S::lit(idx as f64) * cell_size;
                (-1, (boundary - pos) / dir, -cell_size / dir)
            } else {
                (0, S::infinity(), S::infinity())
            }
        };
        let (step_x, t_max_x, t_delta_x) = axis(x, dir_x, cell.x);
        let (step_y, t_max_y, t_delta_y) = axis(y, dir_y, cell.y);
        Self { cell, step_x, step_y, t_max_x, t_max_y, t_delta_x, t_delta_y, started: false }
    }
}

impl<S: Real> Iterator for RayWalk<S> {
    type Item = (Cell, S);

    fn next(&mut self) -> Option<(Cell, S)> {
        if !self.started {
            self.started = true;
            return Some((self.cell, S::zero()));
        }
        let t = self.t_max_x.min(self.t_max_y);
        if self.t_max_x == t {
            self.cell.x += self.step_x;
            self.t_max_x = self.t_max_x + self.t_delta_x;
        }
        if self.t_max_y == t {
            self.cell.y += self.step_y;
            self.t_max_y = self.t_max_y + self.t_delta_y;
        }
        Some((self.cell, t))
    }
}

/// Planar pose in world coordinates; heading in `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Pose2<S> {
    pub x: S,
    pub y: S,
    pub theta: S,
}

impl<S: Real> Pose2<S> {
    pub fn new(x: S, y: S, theta: S) -> Self {
        Self {
            x,
            y,
            theta: wrap_positive(theta),
        }
    }

    pub fn cell(&self, cell_size: S) -> Cell {
        Cell::containing(self.x, self.y, cell_size)
    }

    /// Applies a relative action expressed in this pose's local frame.
    pub fn compose(&self, action: &Action<S>) -> Self {
        let (s, c) = self.theta.sin_cos();
        Self::new(
            self.x + c * action.dx - s * action.dy,
            self.y + s * action.dx + c * action.dy,
            self.theta + action.dtheta,
        )
    }

    /// Expresses the world point `(x, y)` in this pose's local frame.
    pub fn to_local(&self, x: S, y: S) -> (S, S) {
        let (s, c) = self.theta.sin_cos();
        let dx = x - self.x;
        let dy = y - self.y;
        (c * dx + s * dy, -s * dx + c * dy)
    }

    pub fn translated(&self, dx: S, dy: S) -> Self {
        Self {
            x: self.x + dx,
            y: self.y + dy,
            theta: self.theta,
        }
    }
}

/// Relative long-term goal in the agent's local SE(2) frame.
#[derive(Clone, Copy, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Action<S> {
    pub dx: S,
    pub dy: S,
    pub dtheta: S,
}

impl<S: Real> Action<S> {
    pub fn new(dx: S, dy: S, dtheta: S) -> Self {
        Self { dx, dy, dtheta }
    }

    pub fn stay() -> Self {
        Self::new(S::zero(), S::zero(), S::zero())
    }

    /// True when `|dx|, |dy| ≤ radius` and `dtheta ∈ (-π, π]`.
    pub fn is_within(&self, radius: S) -> bool {
        self.dx.is_finite()
            && self.dy.is_finite()
            && self.dtheta.is_finite()
            && self.dx.abs() <= radius
            && self.dy.abs() <= radius
            && self.dtheta > -S::PI()
            && self.dtheta <= S::PI()
    }

    /// Clamps into the action box. The flag reports whether anything changed.
    pub fn clamped(&self, radius: S) -> (Self, bool) {
        let fix = |v: S| {
            if v.is_nan() {
                S::zero()
            } else {
                v.max(-radius).min(radius)
            }
        };
        let dtheta = if !self.dtheta.is_finite() {
            S::zero()
        } else if self.dtheta > -S::PI() && self.dtheta <= S::PI() {
            self.dtheta
        } else {
            wrap_signed(self.dtheta)
        };
        let out = Self::new(fix(self.dx), fix(self.dy), dtheta);
        let changed = out.dx != self.dx || out.dy != self.dy || out.dtheta != self.dtheta;
        (out, changed)
    }
}
