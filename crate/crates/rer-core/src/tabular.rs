//! Exact tabular Q-learning with a pluggable backup order, plus the
//! value-iteration oracle used to measure how many single-transition backups
//! each order needs before the table matches the fixed point.

use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::envs::EnumerableEnv;

/// One index-level interaction record for tabular backups.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Transition {
    pub state: usize,
    pub action: usize,
    pub reward: f64,
    pub next_state: usize,
    pub terminal: bool,
}

/// Dense `(state, action) -> Q` table.
#[derive(Clone, Debug, PartialEq)]
pub struct QTable {
    values: Vec<f64>,
    n_states: usize,
    n_actions: usize,
    pub gamma: f64,
    pub learning_rate: f64,
}

impl QTable {
    pub fn new(n_states: usize, n_actions: usize, gamma: f64, learning_rate: f64) -> Self {
        assert!(n_states >= 1 && n_actions >= 1);
        assert!((0.0..=1.0).contains(&gamma), "gamma must be in [0, 1]");
        assert!(learning_rate > 0.0 && learning_rate <= 1.0, "learning rate must be in (0, 1]");
        QTable { values: vec![0.0; n_states * n_actions], n_states, n_actions, gamma, learning_rate }
    }

    pub fn n_states(&self) -> usize {
        self.n_states
    }

    pub fn n_actions(&self) -> usize {
        self.n_actions
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values[state * self.n_actions + action]
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values[state * self.n_actions + action] = value;
    }

    /// Max over actions of Q(state, .).
    pub fn max_q(&self, state: usize) -> f64 {
        let row = &self.values[state * self.n_actions..(state + 1) * self.n_actions];
        row.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// One TD(0) backup: move Q(s, a) toward `r` (terminal) or
    /// `r + gamma * max_a' Q(s', a')` by the learning rate.
    pub fn td_backup(&mut self, t: &Transition) {
        let target = if t.terminal { t.reward } else { t.reward + self.gamma * self.max_q(t.next_state) };
        let q = self.get(t.state, t.action);
        self.set(t.state, t.action, q + self.learning_rate * (target - q));
    }

    /// Backups over one episode in reverse visit order (last transition
    /// first), so reward information flows the whole trajectory in one pass.
    pub fn reverse_sweep(&mut self, trajectory: &[Transition]) {
        for t in trajectory.iter().rev() {
            self.td_backup(t);
        }
    }

    /// Backups in visit order; the contrast case for reverse sweeps.
    pub fn forward_sweep(&mut self, trajectory: &[Transition]) {
        for t in trajectory {
            self.td_backup(t);
        }
    }

    /// Sup-norm distance to `other` over the given (state, action) pairs.
    pub fn sup_distance_over(&self, other: &QTable, pairs: &[(usize, usize)]) -> f64 {
        pairs
            .iter()
            .map(|&(s, a)| libm::fabs(self.get(s, a) - other.get(s, a)))
            .fold(0.0, f64::max)
    }
}

/// Result of value iteration: the converged table plus the stopping
/// diagnostics (final successive-iterate gap, sweeps used).
#[derive(Clone, Debug)]
pub struct ValueIterationResult {
    pub q: QTable,
    pub iterations: usize,
    pub final_gap: f64,
}

/// Synchronous value iteration on an enumerable deterministic model, run
/// until the successive-iterate sup gap drops below `tolerance`.
pub fn value_iteration<E: EnumerableEnv + ?Sized>(env: &E, gamma: f64, tolerance: f64) -> ValueIterationResult {
    let n_states = env.n_states();
    let n_actions = env.n_actions();
    let mut q = QTable::new(n_states, n_actions, gamma, 1.0);
    let max_sweeps = 1_000_000;
    let mut final_gap = f64::INFINITY;
    for sweep in 1..=max_sweeps {
        let mut next = q.clone();
        let mut gap = 0.0f64;
        for s in 0..n_states {
            if env.is_terminal(s) {
                continue;
            }
            for a in 0..n_actions {
                let (s2, r, term) = env.transition(s, a);
                let v = if term { r } else { r + gamma * q.max_q(s2) };
                gap = gap.max(libm::fabs(v - q.get(s, a)));
                next.set(s, a, v);
            }
        }
        q = next;
        final_gap = gap;
        if gap < tolerance {
            return ValueIterationResult { q, iterations: sweep, final_gap };
        }
    }
    ValueIterationResult { q, iterations: max_sweeps, final_gap }
}

/// The fixed point of repeated backups over one trajectory's transitions:
/// what replay can converge to when only these transitions are ever sampled
/// (unvisited pairs stay at their initial zero). On a chain episode this
/// coincides with the value-iteration oracle restricted to visited pairs.
pub fn trajectory_fixed_point(
    trajectory: &[Transition],
    n_states: usize,
    n_actions: usize,
    gamma: f64,
) -> QTable {
    let mut q = QTable::new(n_states, n_actions, gamma, 1.0);
    // Discounting kills improving cycles, so the values stabilize exactly in
    // at most one sweep per visited pair.
    let max_sweeps = trajectory.len() + 2;
    for _ in 0..max_sweeps {
        let mut next = q.clone();
        let mut changed = false;
        for t in trajectory {
            let v = if t.terminal { t.reward } else { t.reward + gamma * q.max_q(t.next_state) };
            if v != next.get(t.state, t.action) {
                changed = true;
            }
            next.set(t.state, t.action, v);
        }
        q = next;
        if !changed {
            break;
        }
    }
    q
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackupOrder {
    Reverse,
    Forward,
    Uniform,
}

impl fmt::Display for BackupOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            BackupOrder::Reverse => "reverse",
            BackupOrder::Forward => "forward",
            BackupOrder::Uniform => "uniform",
        };
        write!(f, "{name}")
    }
}

/// Budget exhausted before the table reached the trajectory's fixed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct NoConvergence {
    pub budget: usize,
}

impl fmt::Display for NoConvergence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "no convergence within {} backups", self.budget)
    }
}

/// Count single-transition backups (at the given learning rate) until the
/// table is within `tolerance` sup-norm of the trajectory's fixed point over
/// every visited pair. Reverse and forward orders cycle the trajectory;
/// uniform draws transitions independently at random.
#[allow(clippy::too_many_arguments)]
pub fn backups_to_convergence<R: Rng + ?Sized>(
    trajectory: &[Transition],
    n_states: usize,
    n_actions: usize,
    order: BackupOrder,
    gamma: f64,
    learning_rate: f64,
    tolerance: f64,
    budget: usize,
    rng: &mut R,
) -> Result<usize, NoConvergence> {
    let target = trajectory_fixed_point(trajectory, n_states, n_actions, gamma);
    let mut visited: Vec<(usize, usize)> = trajectory.iter().map(|t| (t.state, t.action)).collect();
    visited.sort_unstable();
    visited.dedup();

    let mut q = QTable::new(n_states, n_actions, gamma, learning_rate);
    if q.sup_distance_over(&target, &visited) < tolerance {
        return Ok(0);
    }
    let mut count = 0usize;
    loop {
        match order {
            BackupOrder::Uniform => {
                let t = &trajectory[rng.random_range(0..trajectory.len())];
                if let Some(result) = backup_and_check(&mut q, t, &target, &visited, tolerance, budget, &mut count) {
                    return result;
                }
            }
            BackupOrder::Reverse => {
                for t in trajectory.iter().rev() {
                    if let Some(result) = backup_and_check(&mut q, t, &target, &visited, tolerance, budget, &mut count) {
                        return result;
                    }
                }
            }
            BackupOrder::Forward => {
                for t in trajectory {
                    if let Some(result) = backup_and_check(&mut q, t, &target, &visited, tolerance, budget, &mut count) {
                        return result;
                    }
                }
            }
        }
    }
}

fn backup_and_check(
    q: &mut QTable,
    t: &Transition,
    target: &QTable,
    visited: &[(usize, usize)],
    tolerance: f64,
    budget: usize,
    count: &mut usize,
) -> Option<Result<usize, NoConvergence>> {
    q.td_backup(t);
    *count += 1;
    if q.sup_distance_over(target, visited) < tolerance {
        return Some(Ok(*count));
    }
    if *count >= budget {
        return Some(Err(NoConvergence { budget }));
    }
    None
}

/// Behavior policies for collecting a tabular trajectory from a model.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RolloutPolicy {
    FixedAction(usize),
    UniformRandom,
}

/// Roll one episode from the model's start state, stopping at a terminal
/// state or after `cap` steps.
pub fn collect_episode<E: EnumerableEnv + ?Sized, R: Rng + ?Sized>(
    env: &E,
    policy: RolloutPolicy,
    cap: usize,
    rng: &mut R,
) -> Vec<Transition> {
    let mut state = env.start_state();
    let mut out = Vec::new();
    for _ in 0..cap {
        if env.is_terminal(state) {
            break;
        }
        let action = match policy {
            RolloutPolicy::FixedAction(a) => a,
            RolloutPolicy::UniformRandom => rng.random_range(0..env.n_actions()),
        };
        let (next, reward, terminal) = env.transition(state, action);
        out.push(Transition { state, action, reward, next_state: next, terminal });
        state = next;
        if terminal {
            break;
        }
    }
    out
}
