use rand::Rng;
use rand_distr::{Distribution, Normal};

use super::{Policy, PolicyContext, PolicyError};
use crate::rng::SimRng;
use crate::Action;
use rand::SeedableRng;

/// Gaussian goals: `dx, dy ~ N(0, (R/2)²)` clipped to `[-R, R]`, heading
/// change uniform on `(-π, π]`.
pub struct RandomPolicy {
    rng: SimRng,
    radius: f64,
    std_dev: f64,
}

impl RandomPolicy {
    pub fn new(seed: u64, radius: f64) -> Self {
        Self::with_std_dev(seed, radius, radius / 2.0)
    }

    pub fn with_std_dev(seed: u64, radius: f64, std_dev: f64) -> Self {
        Self {
            rng: SimRng::seed_from_u64(seed),
            radius,
            std_dev,
        }
    }

    pub fn sample(&mut self) -> Action {
        let normal = Normal::new(0.0, self.std_dev).expect("finite standard deviation");
        let dx = normal.sample(&mut self.rng).clamp(-self.radius, self.radius);
        let dy = normal.sample(&mut self.rng).clamp(-self.radius, self.radius);
        let u: f64 = self.rng.random();
        let dtheta = std::f64::consts::PI - std::f64::consts::TAU * u;
        Action::new(dx, dy, dtheta)
    }
}

impl Policy for RandomPolicy {
    fn name(&self) -> &str {
        "random"
    }

    fn act(&mut self, _ctx: &PolicyContext<'_>) -> Result<Action, PolicyError> {
        Ok(self.sample())
    }
}
