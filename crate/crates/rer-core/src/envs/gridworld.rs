//! Gridworld with zero reward everywhere except two terminate cells: a goal
//! worth +1 and a trap worth -1. Moves are deterministic four-neighbor steps;
//! walls block. The agent observes only its own cell, one-hot encoded.

use alloc::vec::Vec;

use rand::RngCore;

use super::{one_hot, EnumerableEnv, EnvError, Environment, Step};

pub const GRID_RIGHT: usize = 0;
pub const GRID_LEFT: usize = 1;
pub const GRID_UP: usize = 2;
pub const GRID_DOWN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Cell {
    pub x: usize,
    pub y: usize,
}

impl Cell {
    pub fn new(x: usize, y: usize) -> Self {
        Cell { x, y }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GridworldConfig {
    pub width: usize,
    pub height: usize,
    pub start: Cell,
    pub goal: Cell,
    pub trap: Cell,
}

impl GridworldConfig {
    pub fn new(width: usize, height: usize, start: Cell, goal: Cell, trap: Cell) -> Self {
        assert!(width >= 1 && height >= 1, "grid must be non-empty");
        for cell in [start, goal, trap] {
            assert!(cell.x < width && cell.y < height, "cell out of bounds");
        }
        assert!(goal != trap, "goal and trap must differ");
        assert!(start != goal && start != trap, "start must not be a terminate cell");
        GridworldConfig { width, height, start, goal, trap }
    }

    pub fn episode_cap(&self) -> usize {
        4 * self.width * self.height
    }

    pub fn cell_index(&self, cell: Cell) -> usize {
        cell.y * self.width + cell.x
    }
}

#[derive(Clone, Debug)]
pub struct GridworldEnv {
    cfg: GridworldConfig,
    cell: Cell,
    steps: usize,
    terminal: bool,
}

impl GridworldEnv {
    pub fn new(cfg: GridworldConfig) -> Self {
        let start = cfg.start;
        GridworldEnv { cfg, cell: start, steps: 0, terminal: false }
    }

    pub fn cell(&self) -> Cell {
        self.cell
    }

    pub fn config(&self) -> &GridworldConfig {
        &self.cfg
    }

    fn cell_of(&self, state: usize) -> Cell {
        Cell { x: state % self.cfg.width, y: state / self.cfg.width }
    }

    fn neighbor(&self, from: Cell, action: usize) -> Cell {
        let mut to = from;
        match action {
            GRID_RIGHT if from.x + 1 < self.cfg.width => to.x += 1,
            GRID_LEFT if from.x > 0 => to.x -= 1,
            GRID_UP if from.y > 0 => to.y -= 1,
            GRID_DOWN if from.y + 1 < self.cfg.height => to.y += 1,
            _ => {} // wall: stay in place
        }
        to
    }
}

impl Environment for GridworldEnv {
    fn obs_dim(&self) -> usize {
        self.cfg.width * self.cfg.height
    }

    fn n_actions(&self) -> usize {
        4
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Vec<f64> {
        self.cell = self.cfg.start;
        self.steps = 0;
        self.terminal = false;
        one_hot(self.cfg.cell_index(self.cell), self.obs_dim())
    }

    fn step(&mut self, action: usize) -> Result<Step, EnvError> {
        if self.terminal {
            return Err(EnvError::SteppedTerminalEnv);
        }
        debug_assert!(action < 4);
        let state = self.cfg.cell_index(self.cell);
        let (next, reward, reached) = EnumerableEnv::transition(self, state, action);
        self.steps += 1;
        self.cell = self.cell_of(next);
        self.terminal = reached || self.steps >= self.cfg.episode_cap();
        Ok(Step { obs: one_hot(next, self.obs_dim()), reward, terminal: self.terminal })
    }
}

impl EnumerableEnv for GridworldEnv {
    fn n_states(&self) -> usize {
        self.cfg.width * self.cfg.height
    }

    fn n_actions(&self) -> usize {
        4
    }

    fn start_state(&self) -> usize {
        self.cfg.cell_index(self.cfg.start)
    }

    fn is_terminal(&self, state: usize) -> bool {
        state == self.cfg.cell_index(self.cfg.goal) || state == self.cfg.cell_index(self.cfg.trap)
    }

    fn transition(&self, state: usize, action: usize) -> (usize, f64, bool) {
        debug_assert!(!self.is_terminal(state));
        let to = self.neighbor(self.cell_of(state), action);
        let next = self.cfg.cell_index(to);
        if to == self.cfg.goal {
            (next, 1.0, true)
        } else if to == self.cfg.trap {
            (next, -1.0, true)
        } else {
            (next, 0.0, false)
        }
    }
}
