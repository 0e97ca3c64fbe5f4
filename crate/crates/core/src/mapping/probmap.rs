use serde::{Deserialize, Serialize};

use super::bresenham::bresenham;
use super::MappingError;
use crate::geometry::{Cell, Pose2, RayWalk};
use crate::scalar::{LogOdds, Real};
use crate::scene::SceneGrid;
use crate::sensor::DepthScan;

/// How a ray is rasterized into map cells during integration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Traversal {
    /// Exact cell-by-cell walk of the continuous ray, the same walk the
    /// sensor marches. A noiseless scan never frees a cell it struck.
    #[default]
    Dda,
    /// Integer line from the agent cell to the endpoint cell.
    Bresenham,
}

/// Log-odds increments, classification thresholds and clamp bounds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MapParams {
    /// Added to the endpoint cell of a ray that struck a surface.
    pub c_occ: f64,
    /// Added to every other cell a ray traverses.
    pub c_free: f64,
    pub tau_occ: f64,
    pub tau_free: f64,
    pub clamp_min: f64,
    pub clamp_max: f64,
    #[serde(default)]
    pub traversal: Traversal,
}

impl Default for MapParams {
    fn default() -> Self {
        Self {
            c_occ: 2.2,
            c_free: -0.4,
            tau_occ: 1.0,
            tau_free: -0.8,
            clamp_min: -10.0,
            clamp_max: 10.0,
            traversal: Traversal::Dda,
        }
    }
}

impl MapParams {
    pub fn validate(&self) -> Result<(), String> {
        if !(self.tau_free < 0.0 && 0.0 < self.tau_occ) {
            return Err("thresholds must satisfy tau_free < 0 < tau_occ".into());
        }
        if !(self.c_occ > 0.0 && self.c_free < 0.0) {
            return Err("c_occ must be positive and c_free negative".into());
        }
        if !(self.clamp_min < self.tau_free && self.tau_occ < self.clamp_max) {
            return Err("clamp bounds must enclose the thresholds".into());
        }
        Ok(())
    }
}

/// Occupancy class of one map cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TriState {
    Occupied,
    Free,
    Unknown,
}

/// Row-major tri-state view of a map.
#[derive(Clone, Debug, PartialEq)]
pub struct TriGrid {
    width: usize,
    height: usize,
    cells: Vec<TriState>,
}

impl TriGrid {
    pub fn new(width: usize, height: usize, fill: TriState) -> Self {
        Self {
            width,
            height,
            cells: vec![fill; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<TriState>) -> Self {
        assert_eq!(cells.len(), width * height, "grid size mismatch");
        Self { width, height, cells }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    pub fn index(&self, c: Cell) -> Option<usize> {
        self.in_bounds(c).then(|| c.y as usize * self.width + c.x as usize)
    }

    /// Out-of-bounds cells read as Unknown.
    pub fn get(&self, c: Cell) -> TriState {
        self.index(c).map_or(TriState::Unknown, |i| self.cells[i])
    }

    pub fn set(&mut self, c: Cell, state: TriState) {
        let i = self.index(c).expect("cell inside grid");
        self.cells[i] = state;
    }

    pub fn is_free(&self, c: Cell) -> bool {
        self.get(c) == TriState::Free
    }

    pub fn as_slice(&self) -> &[TriState] {
        &self.cells
    }

    pub fn cell_at(&self, index: usize) -> Cell {
        Cell::new((index % self.width) as i32, (index / self.width) as i32)
    }
}

/// Probabilistic global occupancy map accumulating log-odds per cell.
///
/// The map frame is a fixed window of cells; `origin` is the map index of
/// world cell `(0, 0)`, chosen so a scene sits centered in the window.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbMap<L> {
    width: usize,
    height: usize,
    cell_size: f64,
    origin: Cell,
    logodds: Vec<L>,
    params: MapParams,
    c_occ: L,
    c_free: L,
    tau_occ: L,
    tau_free: L,
    lo: L,
    hi: L,
}

impl<L: LogOdds> ProbMap<L> {
    pub fn new(width: usize, height: usize, cell_size: f64, params: MapParams) -> Self {
        Self {
            width,
            height,
            cell_size,
            origin: Cell::new(0, 0),
            logodds: vec![L::zero(); width * height],
            params,
            c_occ: L::from_decimal(params.c_occ),
            c_free: L::from_decimal(params.c_free),
            tau_occ: L::from_decimal(params.tau_occ),
            tau_free: L::from_decimal(params.tau_free),
            lo: L::from_decimal(params.clamp_min),
            hi: L::from_decimal(params.clamp_max),
        }
    }

    /// A map of `width × height` cells with `scene` centered inside it.
    pub fn for_scene(
        scene: &SceneGrid,
        width: usize,
        height: usize,
        params: MapParams,
    ) -> Result<Self, MappingError> {
        if scene.width() > width || scene.height() > height {
            return Err(MappingError::SceneTooLarge {
                scene: (scene.width(), scene.height()),
                map: (width, height),
            });
        }
        let mut map = Self::new(width, height, scene.cell_size(), params);
        map.origin = Cell::new(
            ((width - scene.width()) / 2) as i32,
            ((height - scene.height()) / 2) as i32,
        );
        Ok(map)
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

    pub fn origin(&self) -> Cell {
        self.origin
    }

    pub fn params(&self) -> &MapParams {
        &self.params
    }

    pub fn in_bounds(&self, c: Cell) -> bool {
        c.x >= 0 && c.y >= 0 && (c.x as usize) < self.width && (c.y as usize) < self.height
    }

    fn index(&self, c: Cell) -> Option<usize> {
        self.in_bounds(c).then(|| c.y as usize * self.width + c.x as usize)
    }

    /// Map cell containing a world point.
    pub fn world_to_map<S: Real>(&self, x: S, y: S) -> Cell {
        let c = Cell::containing(x, y, S::lit(self.cell_size));
        self.scene_to_map(c)
    }

    pub fn scene_to_map(&self, c: Cell) -> Cell {
        c.offset(self.origin.x, self.origin.y)
    }

    pub fn map_to_scene(&self, c: Cell) -> Cell {
        c.offset(-self.origin.x, -self.origin.y)
    }

    /// World coordinates of a map cell center.
    pub fn map_cell_center(&self, c: Cell) -> (f64, f64) {
        self.map_to_scene(c).center(self.cell_size)
    }

    /// Log-odds of a cell; out-of-bounds cells read as the prior (zero).
    pub fn logodds(&self, c: Cell) -> L {
        self.index(c).map_or(L::zero(), |i| self.logodds[i])
    }

    pub fn set_logodds(&mut self, c: Cell, value: L) {
        let i = self.index(c).expect("cell inside map");
        self.logodds[i] = value;
    }

    pub fn classify_value(&self, v: L) -> TriState {
        if v >= self.tau_occ {
            TriState::Occupied
        } else if v <= self.tau_free {
            TriState::Free
        } else {
            TriState::Unknown
        }
    }

    pub fn classify_cell(&self, c: Cell) -> TriState {
        self.classify_value(self.logodds(c))
    }

    /// Tri-state view: a pure function of the log-odds.
    pub fn classify(&self) -> TriGrid {
        TriGrid {
            width: self.width,
            height: self.height,
            cells: self.logodds.iter().map(|v| self.classify_value(*v)).collect(),
        }
    }

    fn add(&mut self, i: usize, delta: L) {
        self.logodds[i] = (self.logodds[i] + delta).clamp_to(self.lo, self.hi);
    }

    /// Integrates a scan observed from `reported_pose`: every traversed cell
    /// before a ray's endpoint receives `c_free`, the endpoint receives
    /// `c_occ` for hits and `c_free` for max-range misses. Cells outside the
    /// map are skipped. Returns the number of cell updates.
    ///
    /// With [`Traversal::Dda`] the ray's cells are walked up to the one
    /// containing the endpoint, the last cell entered at or before the range.
    /// With [`Traversal::Bresenham`] the line runs from the agent cell to the
    /// cell containing the endpoint (nudged into the struck cell for hits).
    pub fn integrate_scan<S: Real>(&mut self, reported_pose: &Pose2<S>, scan: &DepthScan<S>) -> usize {
        let mut updates = 0;
        for ray in &scan.rays {
            let angle = reported_pose.theta + ray.angle;
            updates += match self.params.traversal {
                Traversal::Dda => self.integrate_dda(reported_pose, angle, ray.range, ray.hit),
                Traversal::Bresenham => self.integrate_bresenham(reported_pose, angle, ray.range, ray.hit),
            };
        }
        updates
    }

    fn update(&mut self, cell: Cell, delta: L) -> usize {
        match self.index(cell) {
            Some(i) => {
                self.add(i, delta);
                1
            }
            None => 0,
        }
    }

    fn integrate_dda<S: Real>(&mut self, pose: &Pose2<S>, angle: S, range: S, hit: bool) -> usize {
        let mut updates = 0;
        let mut walk = RayWalk::new(pose.x, pose.y, angle, S::lit(self.cell_size)).peekable();
        while let Some((scene_cell, _)) = walk.next() {
            let cell = self.scene_to_map(scene_cell);
            let last = walk.peek().is_some_and(|(_, t)| *t > range);
            if last && hit {
                return updates + self.update(cell, self.c_occ);
            }
            updates += self.update(cell, self.c_free);
            if last {
                return updates;
            }
        }
        updates
    }

    fn integrate_bresenham<S: Real>(&mut self, pose: &Pose2<S>, angle: S, range: S, hit: bool) -> usize {
        let cs = S::lit(self.cell_size);
        let (s, c) = angle.sin_cos();
        let t = if hit { range + cs * S::lit(1e-4) } else { range };
        let agent = self.world_to_map(pose.x, pose.y);
        let end = self.world_to_map(pose.x + c * t, pose.y + s * t);
        let line = bresenham(agent, end);
        let (last, traversed) = line.split_last().expect("line has at least one cell");
        let mut updates = 0;
        for cell in traversed {
            updates += self.update(*cell, self.c_free);
        }
        updates + self.update(*last, if hit { self.c_occ } else { self.c_free })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::Exact;
    use crate::sensor::Ray;

    /// Distance from the center of cell (0, 0) to where the +x ray enters
    /// cell `k`, exactly as the sensor computes it.
    fn boundary(k: usize) -> f64 {
        RayWalk::new(0.05, 0.05, 0.0, 0.1).nth(k).unwrap().1
    }

    fn scan_along_row(range: f64, hit: bool) -> (Pose2<f64>, DepthScan<f64>) {
        let pose = Pose2::new(0.05, 0.05, 0.0);
        let scan = DepthScan {
            origin: pose,
            rays: vec![Ray { angle: 0.0, range, hit }],
            fov: 0.0,
            max_range: 5.0,
        };
        (pose, scan)
    }

    #[test]
    fn fresh_map_is_unknown() {
        let map: ProbMap<f64> = ProbMap::new(16, 16, 0.1, MapParams::default());
        assert!(map.classify().as_slice().iter().all(|t| *t == TriState::Unknown));
        assert_eq!(map.logodds(Cell::new(3, 3)), 0.0);
    }

    #[test]
    fn single_hit_ray_along_a_row() {
        let mut map: ProbMap<Exact> = ProbMap::new(16, 4, 0.1, MapParams::default());
        // from cell (0,0) center, hit boundary at x = 0.6 => endpoint cell (6,0)
        let (pose, scan) = scan_along_row(boundary(6), true);
        map.integrate_scan(&pose, &scan);
        let mut bres: ProbMap<Exact> =
            ProbMap::new(16, 4, 0.1, MapParams { traversal: Traversal::Bresenham, ..MapParams::default() });
        bres.integrate_scan(&pose, &scan);
        assert_eq!(bres.logodds, map.logodds);
        let c_free = Exact::from_decimal(-0.4);
        let c_occ = Exact::from_decimal(2.2);
        for x in 0..16 {
            for y in 0..4 {
                let v = map.logodds(Cell::new(x, y));
                let expected = match (x, y) {
                    (0..=5, 0) => c_free,
                    (6, 0) => c_occ,
                    _ => Exact::from_decimal(0.0),
                };
                assert_eq!(v, expected, "cell ({x},{y})");
            }
        }
        assert_eq!(map.classify_cell(Cell::new(6, 0)), TriState::Occupied);
        assert_eq!(map.classify_cell(Cell::new(3, 0)), TriState::Unknown);
    }

    #[test]
    fn miss_endpoint_is_free_evidence() {
        let mut map: ProbMap<Exact> = ProbMap::new(16, 4, 0.1, MapParams::default());
        // endpoint x = 0.55 lies inside cell 5
        let (pose, scan) = scan_along_row(0.5, false);
        map.integrate_scan(&pose, &scan);
        assert_eq!(map.logodds(Cell::new(5, 0)), Exact::from_decimal(-0.4));
        assert_eq!(map.logodds(Cell::new(6, 0)), Exact::from_decimal(0.0));
    }

    #[test]
    fn repeated_integration_doubles_exactly() {
        let mut map: ProbMap<Exact> = ProbMap::new(16, 4, 0.1, MapParams::default());
        let (pose, scan) = scan_along_row(boundary(6), true);
        map.integrate_scan(&pose, &scan);
        let once = map.clone();
        map.integrate_scan(&pose, &scan);
        for x in 0..16 {
            let c = Cell::new(x, 0);
            assert_eq!(map.logodds(c), once.logodds(c) + once.logodds(c));
        }
        // two free traversals reach tau_free exactly
        assert_eq!(map.classify_cell(Cell::new(2, 0)), TriState::Free);
    }

    #[test]
    fn truncated_at_map_boundary() {
        let mut map: ProbMap<f64> = ProbMap::new(4, 1, 0.1, MapParams::default());
        let (pose, scan) = scan_along_row(boundary(10), true);
        let updates = map.integrate_scan(&pose, &scan);
        assert_eq!(updates, 4);
        assert!((0..4).all(|x| map.logodds(Cell::new(x, 0)) == -0.4));
    }

    #[test]
    fn values_stay_clamped() {
        let mut map: ProbMap<f64> = ProbMap::new(16, 1, 0.1, MapParams::default());
        let (pose, scan) = scan_along_row(boundary(6), true);
        for _ in 0..30 {
            map.integrate_scan(&pose, &scan);
        }
        assert_eq!(map.logodds(Cell::new(6, 0)), 10.0);
        assert_eq!(map.logodds(Cell::new(1, 0)), -10.0);
    }

    #[test]
    fn scene_is_centered_in_window() {
        let scene = SceneGrid::empty_room(10, 6, 0.1);
        let map: ProbMap<f64> = ProbMap::for_scene(&scene, 16, 16, MapParams::default()).unwrap();
        assert_eq!(map.origin(), Cell::new(3, 5));
        assert_eq!(map.world_to_map(0.05, 0.05), Cell::new(3, 5));
        let big = SceneGrid::empty_room(20, 6, 0.1);
        assert!(ProbMap::<f64>::for_scene(&big, 16, 16, MapParams::default()).is_err());
    }

    #[test]
    fn params_validation() {
        assert!(MapParams::default().validate().is_ok());
        let bad = MapParams { tau_free: 0.5, ..MapParams::default() };
        assert!(bad.validate().is_err());
    }
}
