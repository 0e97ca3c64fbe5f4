use rand::{Rng, SeedableRng};

use super::{ActionResult, Policy, PolicyContext, PolicyError};
use crate::geometry::{wrap_signed, Cell};
use crate::mapping::{EgoSemanticMap, SemanticCell};
use crate::rng::SimRng;
use crate::{Action, Pose};

pub const VACUUM_TURN_STEP: f64 = std::f64::consts::PI / 20.0;
pub const VACUUM_MAX_TURNS: u32 = 40;

/// Straight ahead until something is hit, then a random number of 9° turns.
///
/// A straight step stops short at the first non-free cell on the heading so
/// the goal stays in known free space. When that cell is occupied and
/// directly ahead the agent bumps into it, which the environment answers with
/// a collision and the next action turns.
pub struct VacuumPolicy {
    rng: SimRng,
}

#[derive(Debug, PartialEq)]
struct Probe {
    /// Farthest sampled distance whose cell and all cells before it are free.
    safe: f64,
    blocked: Option<(f64, SemanticCell)>,
}

fn probe(ego: &EgoSemanticMap, pose: &Pose, heading: f64, cell_size: f64, radius: f64) -> Probe {
    let agent = pose.cell(cell_size);
    let center = ego.center();
    let (s, c) = heading.sin_cos();
    let step = cell_size / 2.0;
    let mut safe = 0.0;
    let mut k = 1;
    loop {
        let d = (k as f64 * step).min(radius);
        let cell = Cell::containing(pose.x + c * d, pose.y + s * d, cell_size);
        if cell != agent {
            let ego_cell = center.offset(cell.x - agent.x, cell.y - agent.y);
            match ego.get(ego_cell) {
                SemanticCell::Free | SemanticCell::Frontier => safe = d,
                other => return Probe { safe, blocked: Some((d, other)) },
            }
        }
        if d >= radius {
            return Probe { safe, blocked: None };
        }
        k += 1;
    }
}

impl VacuumPolicy {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: SimRng::seed_from_u64(seed),
        }
    }

    fn random_turn(&mut self) -> f64 {
        let k = self.rng.random_range(1..=VACUUM_MAX_TURNS);
        let sign = if self.rng.random::<bool>() { 1.0 } else { -1.0 };
        wrap_signed(sign * k as f64 * VACUUM_TURN_STEP)
    }

    fn step_along(dtheta: f64, distance: f64) -> Action {
        let (s, c) = dtheta.sin_cos();
        Action::new(distance * c, distance * s, dtheta)
    }
}

impl Policy for VacuumPolicy {
    fn name(&self) -> &str {
        "vacuum"
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        let obs = ctx.obs;
        let pose = obs.pose();
        let mut dtheta = match obs.last_action_result {
            ActionResult::CollisionPenalized => self.random_turn(),
            _ => 0.0,
        };
        // an unknown wall directly ahead cannot be bumped into; look elsewhere
        for _ in 0..VACUUM_MAX_TURNS {
            let p = probe(&obs.ego_map, pose, pose.theta + dtheta, ctx.cell_size, ctx.action_radius);
            match p.blocked {
                None => return Ok(Self::step_along(dtheta, ctx.action_radius)),
                Some(_) if p.safe >= ctx.cell_size => return Ok(Self::step_along(dtheta, p.safe)),
                Some((d, SemanticCell::Occupied)) => return Ok(Self::step_along(dtheta, d)),
                Some(_) => dtheta = self.random_turn(),
            }
        }
        Ok(Action::new(0.0, 0.0, dtheta))
    }
}
