//! The environment loop: resolve long-term goals, move, capture, integrate,
//! reward and terminate.

mod log;
mod scheduler;

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Cell;
use crate::mapping::{update_coverage, CoverageState, MapParams, MappingError, SemanticView, TriState, EGO_SIZE, GLOBAL_MAP_SIZE};
use crate::metrics::{chamfer, map_diagonal};
use crate::planning::{is_navigable, PathCost, Unnavigable, DEFAULT_MAX_PATH_LENGTH};
use crate::policy::{ActionResult, Observation, Policy, PolicyContext, PolicyError, DEFAULT_ACTION_RADIUS, DEFAULT_HISTORY_LEN};
use crate::rng::SimRng;
use crate::scene::{GroundTruthSurface, SceneGrid};
use crate::sensor::{apply_depth_noise, apply_pose_noise, capture_panorama, NoiseModel, PoseDrift, SensorConfig, SensorError};
use crate::{Action, GlobalProbMap, Pose};
use rand::SeedableRng;

pub use self::log::{read_episode_log, write_episode_log, EpisodeHeader, EpisodeLog, LogRecord};
pub use scheduler::{SceneAssignment, ScenePoolScheduler};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpisodeConfig {
    pub keyframe_budget: usize,
    pub stagnation_window: usize,
    /// Percentage points of coverage gain over the window.
    pub stagnation_threshold: f64,
    pub success_coverage: f64,
    pub termination_reward_coverage: f64,
    pub collision_reward: f64,
    pub termination_reward: f64,
    /// Planner path-length threshold in meters.
    pub max_path_length: f64,
    pub action_radius: f64,
    pub history_len: usize,
    /// Consecutive truncated goals that end the episode.
    pub truncation_limit: usize,
    pub map_size: usize,
    pub ego_size: usize,
    pub noise: NoiseModel,
    pub sensor: SensorConfig,
    pub map: MapParams,
    /// Seed of the noise stream.
    pub seed: u64,
}

impl Default for EpisodeConfig {
    fn default() -> Self {
        Self {
            keyframe_budget: 50,
            stagnation_window: 10,
            stagnation_threshold: 1.0,
            success_coverage: 90.0,
            termination_reward_coverage: 75.0,
            collision_reward: -1.0,
            termination_reward: 1.0,
            max_path_length: DEFAULT_MAX_PATH_LENGTH,
            action_radius: DEFAULT_ACTION_RADIUS,
            history_len: DEFAULT_HISTORY_LEN,
            truncation_limit: 2,
            map_size: GLOBAL_MAP_SIZE,
            ego_size: EGO_SIZE,
            noise: NoiseModel::noiseless(),
            sensor: SensorConfig::default(),
            map: MapParams::default(),
            seed: 0,
        }
    }
}

impl EpisodeConfig {
    pub fn validate(&self) -> Result<(), String> {
        let pct = |name: &str, v: f64| {
            if (0.0..=100.0).contains(&v) {
                Ok(())
            } else {
                Err(format!("{name} must lie in [0, 100], got {v}"))
            }
        };
        if self.keyframe_budget == 0 {
            return Err("keyframe budget must be at least 1".into());
        }
        pct("stagnation_threshold", self.stagnation_threshold)?;
        pct("success_coverage", self.success_coverage)?;
        pct("termination_reward_coverage", self.termination_reward_coverage)?;
        // negated so that NaN is rejected too
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.max_path_length > 0.0) || !(self.action_radius > 0.0) {
            return Err("max_path_length and action_radius must be positive".into());
        }
        if self.history_len == 0 || self.truncation_limit == 0 || self.map_size == 0 || self.ego_size == 0 {
            return Err("history_len, truncation_limit, map_size and ego_size must be at least 1".into());
        }
        self.noise.validate()?;
        self.map.validate()?;
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TerminationCause {
    Budget,
    Success,
    Stagnation,
    CollisionContact,
    UnnavigableGoal,
    BridgeFault,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StepReward {
    pub cr: f64,
    pub col: f64,
    pub term: f64,
}

/// One keyframe of an episode as written to the log.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    /// Keyframe index, starting at 1.
    pub step: usize,
    /// Action after clamping into the action box.
    pub action: Action,
    pub clamped: bool,
    pub result: ActionResult,
    pub cause: Option<Unnavigable>,
    /// Executed plan: map cells and step counts.
    pub path: Vec<Cell>,
    pub plan_cost: Option<PathCost>,
    pub plan_length: f64,
    pub true_pose: Pose,
    pub reported_pose: Pose,
    pub reward: StepReward,
    pub coverage: f64,
    pub covered: usize,
    pub chamfer: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpisodeResult {
    /// Coverage ratio after each keyframe.
    pub coverage_curve: Vec<f64>,
    pub rewards: Vec<StepReward>,
    pub keyframes: usize,
    pub trajectory_length: f64,
    pub collisions: usize,
    pub truncations: usize,
    pub termination_cause: TerminationCause,
    pub initial_coverage: f64,
    pub final_coverage: f64,
    pub initial_covered: usize,
    pub final_covered: usize,
    pub surface_cells: usize,
    pub final_chamfer: f64,
    pub clamp_warnings: usize,
    pub fault: Option<String>,
}

/// Everything an episode produced.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRun {
    pub start: Pose,
    pub steps: Vec<StepRecord>,
    pub result: EpisodeResult,
}

#[derive(Debug, Error, PartialEq)]
pub enum EpisodeError {
    #[error("invalid episode config: {0}")]
    Config(String),
    #[error(transparent)]
    Mapping(#[from] MappingError),
    #[error(transparent)]
    Sensor(#[from] SensorError),
}

/// A running episode.
pub struct Episode<'a> {
    scene: &'a SceneGrid,
    gt: &'a GroundTruthSurface,
    config: EpisodeConfig,
    map: GlobalProbMap,
    view: SemanticView,
    true_pose: Pose,
    reported_pose: Pose,
    start: Pose,
    drift: PoseDrift,
    rng: SimRng,
    history: VecDeque<Pose>,
    coverage: CoverageState,
    initial: CoverageState,
    chamfer_empty: f64,
    last_result: ActionResult,
    consecutive_truncations: usize,
    steps: Vec<StepRecord>,
    trajectory_length: f64,
    collisions: usize,
    truncations: usize,
    clamp_warnings: usize,
    termination: Option<TerminationCause>,
    fault: Option<String>,
}

impl<'a> Episode<'a> {
    /// Places the agent at `start` and integrates the initial panorama.
    pub fn new(
        scene: &'a SceneGrid,
        gt: &'a GroundTruthSurface,
        config: EpisodeConfig,
        start: Pose,
    ) -> Result<Self, EpisodeError> {
        config.validate().map_err(EpisodeError::Config)?;
        let map = GlobalProbMap::for_scene(scene, config.map_size, config.map_size, config.map)?;
        let chamfer_empty = map_diagonal(map.width(), map.height(), map.cell_size());
        let rng = SimRng::seed_from_u64(config.seed);
        let mut ep = Self {
            scene,
            gt,
            view: SemanticView::from_map(&map),
            map,
            true_pose: start,
            reported_pose: start,
            start,
            drift: PoseDrift::default(),
            rng,
            history: VecDeque::new(),
            coverage: CoverageState::default(),
            initial: CoverageState::default(),
            chamfer_empty,
            last_result: ActionResult::Moved,
            consecutive_truncations: 0,
            steps: Vec::new(),
            trajectory_length: 0.0,
            collisions: 0,
            truncations: 0,
            clamp_warnings: 0,
            termination: None,
            fault: None,
            config,
        };
        ep.capture()?;
        ep.initial = ep.coverage.clone();
        ep.history.push_back(start);
        Ok(ep)
    }

    fn capture(&mut self) -> Result<(), EpisodeError> {
        let s = &self.config.sensor;
        let scans = capture_panorama(self.scene, &self.true_pose, s.fov, s.n_rays, s.max_range)?;
        for scan in &scans {
            let observed = apply_depth_noise(scan, &self.config.noise, &mut self.rng);
            let from = Pose::new(self.reported_pose.x, self.reported_pose.y, scan.origin.theta);
            self.map.integrate_scan(&from, &observed);
        }
        self.view = self.planning_view();
        self.coverage = update_coverage(&self.map, self.gt)?;
        Ok(())
    }

    /// Tri-state view used by policies and the planner. The cell under the
    /// reported pose is the agent's own footprint and always reads Free.
    fn planning_view(&self) -> SemanticView {
        let mut tri = self.map.classify();
        tri.set(self.map.world_to_map(self.reported_pose.x, self.reported_pose.y), TriState::Free);
        SemanticView::from_tri(tri)
    }

    pub fn config(&self) -> &EpisodeConfig {
        &self.config
    }

    pub fn map(&self) -> &GlobalProbMap {
        &self.map
    }

    pub fn view(&self) -> &SemanticView {
        &self.view
    }

    pub fn true_pose(&self) -> Pose {
        self.true_pose
    }

    pub fn reported_pose(&self) -> Pose {
        self.reported_pose
    }

    pub fn coverage(&self) -> &CoverageState {
        &self.coverage
    }

    pub fn keyframes(&self) -> usize {
        self.steps.len()
    }

    pub fn steps(&self) -> &[StepRecord] {
        &self.steps
    }

    pub fn termination(&self) -> Option<TerminationCause> {
        self.termination
    }

    pub fn is_done(&self) -> bool {
        self.termination.is_some()
    }

    pub fn observation(&self) -> Observation {
        let agent = self.map.world_to_map(self.reported_pose.x, self.reported_pose.y);
        Observation {
            ego_map: self.view.crop(agent, self.config.ego_size),
            pose_history: self.history.iter().copied().collect(),
            step_index: self.steps.len(),
            last_action_result: self.last_result,
        }
    }

    pub fn context<'b>(&'b self, obs: &'b Observation) -> PolicyContext<'b> {
        PolicyContext {
            obs,
            view: &self.view,
            agent_cell: self.map.world_to_map(self.reported_pose.x, self.reported_pose.y),
            map_origin: self.map.origin(),
            cell_size: self.map.cell_size(),
            action_radius: self.config.action_radius,
            max_path_length: self.config.max_path_length,
        }
    }

    /// Ends the episode because the policy failed to produce an action.
    pub fn fault(&mut self, err: PolicyError) {
        if self.termination.is_none() {
            self.fault = Some(err.to_string());
            self.termination = Some(TerminationCause::BridgeFault);
        }
    }

    /// True when the world point lies in an occupied scene cell.
    fn scene_blocked(&self, x: f64, y: f64) -> bool {
        self.scene.is_occupied(Cell::containing(x, y, self.scene.cell_size()))
    }

    /// Resolves one long-term goal. Panics if the episode already ended.
    pub fn step(&mut self, action: Action) -> Result<&StepRecord, EpisodeError> {
        assert!(self.termination.is_none(), "step on a finished episode");
        let (action, clamped) = action.clamped(self.config.action_radius);
        if clamped {
            self.clamp_warnings += 1;
            ::log::warn!("action clamped into the action box at keyframe {}", self.steps.len() + 1);
        }
        let cs = self.map.cell_size();
        let goal = self.reported_pose.compose(&action);
        // offset between where the agent is and where it believes it is
        let (ox, oy) = (self.true_pose.x - self.reported_pose.x, self.true_pose.y - self.reported_pose.y);
        let agent_cell = self.map.world_to_map(self.reported_pose.x, self.reported_pose.y);
        let goal_cell = self.map.world_to_map(goal.x, goal.y);
        let goal_state = self.view.tri.get(goal_cell);

        let mut reward = StepReward::default();
        let mut cause = None;
        let mut path = Vec::new();
        let mut plan_cost = None;
        let mut plan_length = 0.0;
        let mut contact = false;
        let before = self.coverage.ratio;

        let predicted_hit = goal_state == TriState::Occupied
            || (goal_state != TriState::Unknown && self.scene_blocked(goal.x + ox, goal.y + oy));
        let result = if predicted_hit {
            reward.col = self.config.collision_reward;
            self.collisions += 1;
            ActionResult::CollisionPenalized
        } else {
            match is_navigable(&self.view.tri, agent_cell, goal_cell, cs, self.config.max_path_length) {
                Err(why) => {
                    cause = Some(why);
                    self.truncations += 1;
                    ActionResult::Truncated
                }
                Ok(plan) => {
                    contact = plan.path.iter().any(|c| {
                        let (x, y) = self.map.map_cell_center(*c);
                        self.scene_blocked(x + ox, y + oy)
                    }) || self.scene_blocked(goal.x + ox, goal.y + oy);
                    if contact {
                        reward.col = self.config.collision_reward;
                        self.collisions += 1;
                        ActionResult::CollisionPenalized
                    } else {
                        self.trajectory_length += plan.length;
                        plan_length = plan.length;
                        plan_cost = Some(plan.cost);
                        path = plan.path;
                        self.true_pose = Pose::new(goal.x + ox, goal.y + oy, goal.theta);
                        let k = self.steps.len() + 1;
                        self.reported_pose =
                            apply_pose_noise(&self.true_pose, &self.config.noise, k, &mut self.drift, &mut self.rng);
                        self.capture()?;
                        reward.cr = self.coverage.ratio - before;
                        ActionResult::Moved
                    }
                }
            }
        };

        self.consecutive_truncations = if result == ActionResult::Truncated {
            self.consecutive_truncations + 1
        } else {
            0
        };
        self.last_result = result;
        self.history.push_back(self.reported_pose);
        while self.history.len() > self.config.history_len {
            self.history.pop_front();
        }

        let record = StepRecord {
            step: self.steps.len() + 1,
            action,
            clamped,
            result,
            cause,
            path,
            plan_cost,
            plan_length,
            true_pose: self.true_pose,
            reported_pose: self.reported_pose,
            reward,
            coverage: self.coverage.ratio,
            covered: self.coverage.covered_count(),
            chamfer: chamfer(self.gt.cells(), &self.coverage.covered, cs, self.chamfer_empty),
        };
        self.steps.push(record);
        self.termination = self.check_termination(contact);
        if self.termination.is_some() && self.coverage.ratio > self.config.termination_reward_coverage {
            self.steps.last_mut().expect("just pushed").reward.term = self.config.termination_reward;
        }
        Ok(self.steps.last().expect("just pushed"))
    }

    fn check_termination(&self, contact: bool) -> Option<TerminationCause> {
        let c = &self.config;
        let k = self.steps.len();
        if contact {
            return Some(TerminationCause::CollisionContact);
        }
        if self.coverage.ratio >= c.success_coverage {
            return Some(TerminationCause::Success);
        }
        if k >= c.keyframe_budget {
            return Some(TerminationCause::Budget);
        }
        if k >= c.stagnation_window {
            let gain: f64 = self.steps[k - c.stagnation_window..].iter().map(|s| s.reward.cr).sum();
            if gain < c.stagnation_threshold {
                return Some(TerminationCause::Stagnation);
            }
        }
        if self.consecutive_truncations >= c.truncation_limit {
            return Some(TerminationCause::UnnavigableGoal);
        }
        None
    }

    /// Consumes a finished episode into its log records and result.
    pub fn finish(self) -> EpisodeRun {
        let termination_cause = self.termination.expect("finish called on a running episode");
        let result = EpisodeResult {
            coverage_curve: self.steps.iter().map(|s| s.coverage).collect(),
            rewards: self.steps.iter().map(|s| s.reward).collect(),
            keyframes: self.steps.len(),
            trajectory_length: self.trajectory_length,
            collisions: self.collisions,
            truncations: self.truncations,
            termination_cause,
            initial_coverage: self.initial.ratio,
            final_coverage: self.coverage.ratio,
            initial_covered: self.initial.covered_count(),
            final_covered: self.coverage.covered_count(),
            surface_cells: self.gt.count(),
            final_chamfer: chamfer(
                self.gt.cells(),
                &self.coverage.covered,
                self.map.cell_size(),
                self.chamfer_empty,
            ),
            clamp_warnings: self.clamp_warnings,
            fault: self.fault,
        };
        EpisodeRun {
            start: self.start,
            steps: self.steps,
            result,
        }
    }
}

/// Runs `policy` from `start` until a termination condition fires.
pub fn run_episode(
    scene: &SceneGrid,
    gt: &GroundTruthSurface,
    policy: &mut dyn Policy,
    config: EpisodeConfig,
    start: Pose,
) -> Result<EpisodeRun, EpisodeError> {
    let mut ep = Episode::new(scene, gt, config, start)?;
    while !ep.is_done() {
        let obs = ep.observation();
        let action = policy.act(&ep.context(&obs));
        match action {
            Ok(a) => {
                ep.step(a)?;
            }
            Err(e) => ep.fault(e),
        }
    }
    Ok(ep.finish())
}
