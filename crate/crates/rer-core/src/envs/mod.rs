//! Deterministic in-repo environments: a linear chain MDP, a gridworld with
//! one goal and one trap cell, and classic Mountain Car.
//!
//! All dynamics are deterministic given (state, action); randomness only
//! enters through the start state (Mountain Car) and the caller's policy.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use rand::RngCore;

mod chain;
mod gridworld;
mod mountain_car;

pub use chain::{ChainConfig, ChainEnv, CHAIN_BACKWARD, CHAIN_FORWARD};
pub use gridworld::{Cell, GridworldConfig, GridworldEnv, GRID_DOWN, GRID_LEFT, GRID_RIGHT, GRID_UP};
pub use mountain_car::{
    MountainCarConfig, MountainCarEnv, MC_GOAL_POSITION, MC_NO_PUSH, MC_POSITION_MAX,
    MC_POSITION_MIN, MC_PUSH_LEFT, MC_PUSH_RIGHT, MC_VELOCITY_LIMIT,
};

/// One environment step: next observation, reward collected, episode-end flag.
#[derive(Clone, Debug, PartialEq)]
pub struct Step {
    pub obs: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EnvError {
    /// `step` was called after the episode already ended; call `reset` first.
    SteppedTerminalEnv,
}

impl fmt::Display for EnvError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EnvError::SteppedTerminalEnv => write!(f, "stepped an environment in a terminal state"),
        }
    }
}

/// A resettable, steppable episodic environment with vector observations and
/// a discrete action space.
pub trait Environment {
    fn obs_dim(&self) -> usize;
    fn n_actions(&self) -> usize;
    /// Put the environment into a fresh start state and return the first
    /// observation.
    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;
    fn step(&mut self, action: usize) -> Result<Step, EnvError>;
}

/// Finite deterministic MDP exposed as an enumerable model, for value
/// iteration and tabular backup studies. The model ignores episode caps.
pub trait EnumerableEnv {
    fn n_states(&self) -> usize;
    fn n_actions(&self) -> usize;
    fn start_state(&self) -> usize;
    fn is_terminal(&self, state: usize) -> bool;
    /// Deterministic model: (next state, reward, next state is terminal).
    fn transition(&self, state: usize, action: usize) -> (usize, f64, bool);
}

/// Constructor-style description of an environment; lets configs stay plain
/// data while each training replica builds its own instance.
#[derive(Clone, Debug, PartialEq)]
pub enum EnvSpec {
    Chain(ChainConfig),
    Gridworld(GridworldConfig),
    MountainCar(MountainCarConfig),
}

impl EnvSpec {
    pub fn build(&self) -> Box<dyn Environment> {
        match self {
            EnvSpec::Chain(cfg) => Box::new(ChainEnv::new(cfg.clone())),
            EnvSpec::Gridworld(cfg) => Box::new(GridworldEnv::new(cfg.clone())),
            EnvSpec::MountainCar(cfg) => Box::new(MountainCarEnv::new(cfg.clone())),
        }
    }

    pub fn obs_dim(&self) -> usize {
        match self {
            EnvSpec::Chain(cfg) => cfg.length + 1,
            EnvSpec::Gridworld(cfg) => cfg.width * cfg.height,
            EnvSpec::MountainCar(_) => 2,
        }
    }

    pub fn n_actions(&self) -> usize {
        match self {
            EnvSpec::Chain(_) => 2,
            EnvSpec::Gridworld(_) => 4,
            EnvSpec::MountainCar(_) => 3,
        }
    }
}

pub(crate) fn one_hot(index: usize, dim: usize) -> Vec<f64> {
    let mut v = alloc::vec![0.0; dim];
    v[index] = 1.0;
    v
}
