//! Exploration policies: the heuristic baselines and the bridge to external
//! agents.

mod bridge;
mod fbe;
mod random;
mod vacuum;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Cell;
use crate::mapping::{EgoSemanticMap, SemanticView};
use crate::{Action, Pose};

pub use bridge::{
    serve_agent, AgentReply, BridgeConnection, BridgeEndpoint, BridgePolicy, StepMessage, DEFAULT_BRIDGE_TIMEOUT,
    HANDSHAKE,
};
pub use fbe::FrontierPolicy;
pub use random::RandomPolicy;
pub use vacuum::{VacuumPolicy, VACUUM_MAX_TURNS, VACUUM_TURN_STEP};

/// Default bound on `|dx|` and `|dy|` of an action, in meters.
pub const DEFAULT_ACTION_RADIUS: f64 = 3.2;
pub const DEFAULT_HISTORY_LEN: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum ActionResult {
    Moved,
    CollisionPenalized,
    Truncated,
}

impl ActionResult {
    pub fn as_str(self) -> &'static str {
        match self {
            ActionResult::Moved => "Moved",
            ActionResult::CollisionPenalized => "CollisionPenalized",
            ActionResult::Truncated => "Truncated",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "Moved" => Some(ActionResult::Moved),
            "CollisionPenalized" => Some(ActionResult::CollisionPenalized),
            "Truncated" => Some(ActionResult::Truncated),
            _ => None,
        }
    }
}

/// What a policy sees at each keyframe.
#[derive(Clone, Debug)]
pub struct Observation {
    pub ego_map: EgoSemanticMap,
    /// Most recent reported poses, oldest first; never empty.
    pub pose_history: Vec<Pose>,
    pub step_index: usize,
    pub last_action_result: ActionResult,
}

impl Observation {
    pub fn pose(&self) -> &Pose {
        self.pose_history.last().expect("pose history is never empty")
    }
}

/// Observation plus the global map products an in-process policy may use.
pub struct PolicyContext<'a> {
    pub obs: &'a Observation,
    /// Global tri-state map with frontier labels.
    pub view: &'a SemanticView,
    /// Map cell of the reported agent position.
    pub agent_cell: Cell,
    /// World coordinates of map cell `(0, 0)`'s lower corner are
    /// `-origin * cell_size`.
    pub map_origin: Cell,
    pub cell_size: f64,
    pub action_radius: f64,
    pub max_path_length: f64,
}

impl PolicyContext<'_> {
    pub fn map_cell_center(&self, c: Cell) -> (f64, f64) {
        c.offset(-self.map_origin.x, -self.map_origin.y).center(self.cell_size)
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PolicyError {
    #[error("bridge timed out waiting for an action")]
    BridgeTimeout,
    #[error("bridge protocol error: {0}")]
    BridgeProtocol(String),
}

pub trait Policy: Send {
    fn name(&self) -> &str;

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError>;
}

/// Policy selection as written in run configs.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    Random,
    Vacuum,
    Fbe,
    Bridge(BridgeEndpoint),
}

impl PolicyKind {
    pub fn label(&self) -> &'static str {
        match self {
            PolicyKind::Random => "random",
            PolicyKind::Vacuum => "vacuum",
            PolicyKind::Fbe => "fbe",
            PolicyKind::Bridge(_) => "bridge",
        }
    }

    /// Instantiates a fresh per-episode policy.
    pub fn build(&self, seed: u64, action_radius: f64) -> Result<Box<dyn Policy>, PolicyError> {
        Ok(match self {
            PolicyKind::Random => Box::new(RandomPolicy::new(seed, action_radius)),
            PolicyKind::Vacuum => Box::new(VacuumPolicy::new(seed)),
            PolicyKind::Fbe => Box::new(FrontierPolicy::new()),
            PolicyKind::Bridge(endpoint) => {
                Box::new(BridgePolicy::new(BridgeConnection::connect(endpoint, DEFAULT_BRIDGE_TIMEOUT)?))
            }
        })
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PolicyKind::Bridge(endpoint) => write!(f, "bridge:{endpoint}"),
            other => f.write_str(other.label()),
        }
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "random" => Ok(PolicyKind::Random),
            "vacuum" => Ok(PolicyKind::Vacuum),
            "fbe" => Ok(PolicyKind::Fbe),
            other => match other.strip_prefix("bridge:") {
                Some(endpoint) => endpoint.parse().map(PolicyKind::Bridge),
                None => Err(format!("unknown policy {other:?} (expected random, vacuum, fbe or bridge:<endpoint>)")),
            },
        }
    }
}

/// Replays a fixed action sequence, then stays in place.
pub struct ReplayPolicy {
    actions: std::vec::IntoIter<Action>,
}

impl ReplayPolicy {
    pub fn new(actions: Vec<Action>) -> Self {
        Self { actions: actions.into_iter() }
    }
}

impl Policy for ReplayPolicy {
    fn name(&self) -> &str {
        "replay"
    }

    fn act(&mut self, _ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        Ok(self.actions.next().unwrap_or_else(Action::stay))
    }
}
