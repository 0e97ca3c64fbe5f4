use rand::Rng;

use crate::rng::SimRng;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SceneAssignment {
    /// Index into the pool.
    pub scene: usize,
    pub swapped: bool,
}

/// Active-scene stream for training-style episode scheduling: each episode
/// slot after the first swaps the active scene for a uniformly drawn inactive
/// one with probability `p`.
pub struct ScenePoolScheduler {
    pool_len: usize,
    p: f64,
    active: usize,
    started: bool,
    rng: SimRng,
}

impl ScenePoolScheduler {
    pub fn new(pool_len: usize, p: f64, rng: SimRng) -> Result<Self, String> {
        if pool_len == 0 {
            return Err("scene pool is empty".into());
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(format!("swap probability {p} outside [0, 1]"));
        }
        Ok(Self {
            pool_len,
            p,
            active: 0,
            started: false,
            rng,
        })
    }

    pub fn active(&self) -> usize {
        self.active
    }
}

impl Iterator for ScenePoolScheduler {
    type Item = SceneAssignment;

    fn next(&mut self) -> Option<SceneAssignment> {
        if !self.started {
            self.started = true;
            return Some(SceneAssignment { scene: self.active, swapped: false });
        }
        let swap = self.pool_len > 1 && self.rng.random_bool(self.p);
        if swap {
            // uniform over the other pool members
            let pick = self.rng.random_range(0..self.pool_len - 1);
            self.active = if pick >= self.active { pick + 1 } else { pick };
        }
        Some(SceneAssignment { scene: self.active, swapped: swap })
    }
}
