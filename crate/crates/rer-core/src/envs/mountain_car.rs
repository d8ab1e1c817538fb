//! Mountain Car: an underpowered car in a valley must build momentum to
//! reach the flag on the right hill. Standard dynamics with configurable
//! gravity and engine force; reward is -1 every frame.

use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;
use rand::RngCore;

use super::{EnvError, Environment, Step};

pub const MC_PUSH_LEFT: usize = 0;
pub const MC_NO_PUSH: usize = 1;
pub const MC_PUSH_RIGHT: usize = 2;

pub const MC_POSITION_MIN: f64 = -1.2;
pub const MC_POSITION_MAX: f64 = 0.6;
pub const MC_VELOCITY_LIMIT: f64 = 0.07;
pub const MC_GOAL_POSITION: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct MountainCarConfig {
    pub gravity: f64,
    pub force: f64,
    pub episode_cap: usize,
}

impl Default for MountainCarConfig {
    fn default() -> Self {
        MountainCarConfig { gravity: 0.0025, force: 0.0025, episode_cap: 200 }
    }
}

/// Observations are raw `(position, velocity)` pairs. Start position is
/// uniform in [-0.6, -0.4] with zero velocity; the episode ends at the goal
/// position or at the step cap.
#[derive(Clone, Debug)]
pub struct MountainCarEnv {
    cfg: MountainCarConfig,
    position: f64,
    velocity: f64,
    steps: usize,
    terminal: bool,
}

impl MountainCarEnv {
    pub fn new(cfg: MountainCarConfig) -> Self {
        MountainCarEnv { cfg, position: -0.5, velocity: 0.0, steps: 0, terminal: false }
    }

    pub fn position(&self) -> f64 {
        self.position
    }

    pub fn velocity(&self) -> f64 {
        self.velocity
    }

    pub fn steps_taken(&self) -> usize {
        self.steps
    }

    /// Reset into an exact state; used by tests that pin the dynamics.
    pub fn reset_to(&mut self, position: f64, velocity: f64) -> Vec<f64> {
        self.position = position;
        self.velocity = velocity;
        self.steps = 0;
        self.terminal = false;
        vec![self.position, self.velocity]
    }
}

impl Environment for MountainCarEnv {
    fn obs_dim(&self) -> usize {
        2
    }

    fn n_actions(&self) -> usize {
        3
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        let position = rng.random_range(-0.6..-0.4);
        self.reset_to(position, 0.0)
    }

    fn step(&mut self, action: usize) -> Result<Step, EnvError> {
        if self.terminal {
            return Err(EnvError::SteppedTerminalEnv);
        }
        debug_assert!(action < 3);
        let push = action as f64 - 1.0;
        self.velocity += self.cfg.force * push - self.cfg.gravity * libm::cos(3.0 * self.position);
        self.velocity = self.velocity.clamp(-MC_VELOCITY_LIMIT, MC_VELOCITY_LIMIT);
        self.position += self.velocity;
        self.position = self.position.clamp(MC_POSITION_MIN, MC_POSITION_MAX);
        if self.position <= MC_POSITION_MIN && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        self.steps += 1;
        self.terminal = self.position >= MC_GOAL_POSITION || self.steps >= self.cfg.episode_cap;
        Ok(Step { obs: vec![self.position, self.velocity], reward: -1.0, terminal: self.terminal })
    }
}
