//! Linear chain MDP: states 0..=length laid out in a row, with the terminal
//! state at index `length`. Moving forward from the last non-terminal state
//! collects the terminal reward; every other move collects the step reward.

use alloc::vec::Vec;

use rand::RngCore;

use super::{one_hot, EnumerableEnv, EnvError, Environment, Step};

pub const CHAIN_FORWARD: usize = 0;
pub const CHAIN_BACKWARD: usize = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct ChainConfig {
    /// Number of non-terminal states, i.e. forward steps from start to the
    /// terminal state.
    pub length: usize,
    pub terminal_reward: f64,
    pub step_reward: f64,
}

impl ChainConfig {
    pub fn new(length: usize) -> Self {
        assert!(length >= 2, "chain length must be at least 2");
        ChainConfig { length, terminal_reward: 1.0, step_reward: 0.0 }
    }

    /// Step budget per episode; generous enough that a random walk still
    /// terminates in almost every episode.
    pub fn episode_cap(&self) -> usize {
        100 * self.length
    }
}

/// The chain as a steppable environment. Observations are one-hot state
/// encodings over `length + 1` states; actions are forward (0) and
/// backward (1), with backward blocked at state 0.
#[derive(Clone, Debug)]
pub struct ChainEnv {
    cfg: ChainConfig,
    state: usize,
    steps: usize,
    terminal: bool,
}

impl ChainEnv {
    pub fn new(cfg: ChainConfig) -> Self {
        ChainEnv { cfg, state: 0, steps: 0, terminal: false }
    }

    pub fn state(&self) -> usize {
        self.state
    }

    pub fn config(&self) -> &ChainConfig {
        &self.cfg
    }
}

impl Environment for ChainEnv {
    fn obs_dim(&self) -> usize {
        self.cfg.length + 1
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Vec<f64> {
        self.state = 0;
        self.steps = 0;
        self.terminal = false;
        one_hot(0, self.obs_dim())
    }

    fn step(&mut self, action: usize) -> Result<Step, EnvError> {
        if self.terminal {
            return Err(EnvError::SteppedTerminalEnv);
        }
        debug_assert!(action < 2);
        let (next, reward, reached) = EnumerableEnv::transition(self, self.state, action);
        self.steps += 1;
        self.state = next;
        self.terminal = reached || self.steps >= self.cfg.episode_cap();
        Ok(Step { obs: one_hot(next, self.obs_dim()), reward, terminal: self.terminal })
    }
}

impl EnumerableEnv for ChainEnv {
    fn n_states(&self) -> usize {
        self.cfg.length + 1
    }

    fn n_actions(&self) -> usize {
        2
    }

    fn start_state(&self) -> usize {
        0
    }

    fn is_terminal(&self, state: usize) -> bool {
        state == self.cfg.length
    }

    fn transition(&self, state: usize, action: usize) -> (usize, f64, bool) {
        debug_assert!(!self.is_terminal(state));
        let next = match action {
            CHAIN_FORWARD => state + 1,
            _ => state.saturating_sub(1),
        };
        if next == self.cfg.length {
            (next, self.cfg.terminal_reward, true)
        } else {
            (next, self.cfg.step_reward, false)
        }
    }
}
