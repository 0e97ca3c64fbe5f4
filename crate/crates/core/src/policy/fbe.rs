use std::collections::BTreeSet;

use super::{ActionResult, Policy, PolicyContext, PolicyError};
use crate::geometry::Cell;
use crate::mapping::SemanticView;
use crate::planning::{astar, distance_field, PathCost};
use crate::Action;

/// Nearest-frontier exploration: head for the frontier cell with the shortest
/// planned path, stopping at the last path cell inside the action box.
///
/// A goal the environment refused (collision or truncation) is remembered
/// together with its frontier, and both are skipped from then on; otherwise
/// an unchanged map would produce the same refused goal forever.
#[derive(Default)]
pub struct FrontierPolicy {
    pending: Option<(Cell, Cell)>,
    refused: BTreeSet<Cell>,
}

impl FrontierPolicy {
    pub fn new() -> Self {
        Self::default()
    }

    /// Frontier with minimum path cost from `agent`; ties go to the lower
    /// `(y, x)` cell. Frontiers touching the agent cell are skipped since
    /// standing there again reveals nothing new.
    pub fn nearest_frontier(view: &SemanticView, agent: Cell) -> Option<(Cell, PathCost)> {
        Self::nearest_frontier_excluding(view, agent, &BTreeSet::new())
    }

    fn nearest_frontier_excluding(view: &SemanticView, agent: Cell, skip: &BTreeSet<Cell>) -> Option<(Cell, PathCost)> {
        let field = distance_field(&view.tri, agent);
        view.frontiers
            .cells()
            .iter()
            .filter(|c| (c.x - agent.x).abs().max((c.y - agent.y).abs()) > 1 && !skip.contains(c))
            .filter_map(|&c| view.tri.index(c).and_then(|i| field[i]).map(|cost| (c, cost)))
            .min_by(|a, b| a.1.cmp(&b.1).then(a.0.cmp(&b.0)))
    }
}

impl Policy for FrontierPolicy {
    fn name(&self) -> &str {
        "fbe"
    }

    fn act(&mut self, ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        if let Some((frontier, goal)) = self.pending.take() {
            if ctx.obs.last_action_result != ActionResult::Moved {
                self.refused.insert(frontier);
                self.refused.insert(goal);
            }
        }
        let rotate = Action::new(0.0, 0.0, std::f64::consts::FRAC_PI_2);
        let Some((target, _)) = Self::nearest_frontier_excluding(ctx.view, ctx.agent_cell, &self.refused) else {
            return Ok(rotate);
        };
        let Ok(plan) = astar(&ctx.view.tri, ctx.agent_cell, target, ctx.cell_size, f64::INFINITY) else {
            return Ok(rotate);
        };
        let pose = ctx.obs.pose();
        let goal = plan.path.iter().skip(1).rev().filter(|c| !self.refused.contains(c)).find_map(|&c| {
            let (x, y) = ctx.map_cell_center(c);
            let (dx, dy) = pose.to_local(x, y);
            (dx.abs() <= ctx.action_radius && dy.abs() <= ctx.action_radius).then_some((c, dx, dy))
        });
        Ok(match goal {
            Some((cell, dx, dy)) => {
                self.pending = Some((target, cell));
                Action::new(dx, dy, 0.0)
            }
            None => rotate,
        })
    }
}
