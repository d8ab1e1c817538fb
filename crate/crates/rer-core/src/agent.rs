//! DQN training loop with pluggable replay sampling (uniform, reverse, or
//! mixed) and an optional target network for the baseline configurations.
//! Reverse and mixed sampling deliberately exclude the target network and
//! double-Q targets: bootstrapping from a stale copy would cancel the effect
//! of updating Q-values in reverse order.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::envs::{EnvSpec, Environment};
use crate::nn::{self, MlpParams, RmsPropState};
use crate::replay::{ReplayMemory, ReverseSamplerState, Transition};
use crate::seeding::stream_seed;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SamplerKind {
    Uniform,
    Reverse,
    Mixed,
}

impl fmt::Display for SamplerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Reverse => "reverse",
            SamplerKind::Mixed => "mixed",
        };
        write!(f, "{name}")
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AgentConfig {
    pub gamma: f64,
    pub epsilon_start: f64,
    pub epsilon_end: f64,
    pub epsilon_decay_frames: u64,
    pub batch_size: usize,
    pub memory_capacity: usize,
    pub sampler: SamplerKind,
    /// Index spacing of the reverse cursor; used by reverse and mixed only.
    pub stride: usize,
    /// Copy the online network into the target network every this many
    /// gradient steps. `None` bootstraps from the online network directly.
    pub target_update_frequency: Option<u64>,
    pub double_q: bool,
    pub learning_rate: f64,
    pub hidden_size: usize,
    pub rmsprop_beta: f64,
}

impl Default for AgentConfig {
    fn default() -> Self {
        AgentConfig {
            gamma: 0.99999,
            epsilon_start: 1.0,
            epsilon_end: 0.1,
            epsilon_decay_frames: 50_000,
            batch_size: 32,
            memory_capacity: 50_000,
            sampler: SamplerKind::Uniform,
            stride: 300,
            target_update_frequency: None,
            double_q: false,
            learning_rate: 0.0025,
            hidden_size: 64,
            rmsprop_beta: 0.99,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConfigError {
    /// Reverse-order sampling with a target network: the stale copy would
    /// bootstrap from old max Q-values and cancel the reverse-update effect.
    ReverseSamplerWithTargetNetwork,
    /// Double-Q targets require a target network, so the same rule applies.
    ReverseSamplerWithDoubleQ,
    GammaOutOfRange,
    EpsilonOutOfRange,
    ZeroBatchSize,
    ZeroMemoryCapacity,
    ZeroStride,
    ZeroHiddenSize,
    NonPositiveLearningRate,
    BetaOutOfRange,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let msg = match self {
            ConfigError::ReverseSamplerWithTargetNetwork => {
                "reverse/mixed sampling cannot use a target network"
            }
            ConfigError::ReverseSamplerWithDoubleQ => "reverse/mixed sampling cannot use double-Q targets",
            ConfigError::GammaOutOfRange => "gamma must be in [0, 1]",
            ConfigError::EpsilonOutOfRange => {
                "epsilon bounds must satisfy 0 <= end <= start <= 1"
            }
            ConfigError::ZeroBatchSize => "batch size must be positive",
            ConfigError::ZeroMemoryCapacity => "memory capacity must be positive",
            ConfigError::ZeroStride => "stride must be positive for reverse/mixed sampling",
            ConfigError::ZeroHiddenSize => "hidden layer size must be positive",
            ConfigError::NonPositiveLearningRate => "learning rate must be positive",
            ConfigError::BetaOutOfRange => "optimizer beta must be in [0, 1)",
        };
        write!(f, "{msg}")
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), ConfigError> {
        if !(0.0..=1.0).contains(&self.gamma) {
            return Err(ConfigError::GammaOutOfRange);
        }
        if !(0.0..=1.0).contains(&self.epsilon_start)
            || !(0.0..=1.0).contains(&self.epsilon_end)
            || self.epsilon_end > self.epsilon_start
        {
            return Err(ConfigError::EpsilonOutOfRange);
        }
        if self.batch_size == 0 {
            return Err(ConfigError::ZeroBatchSize);
        }
        if self.memory_capacity == 0 {
            return Err(ConfigError::ZeroMemoryCapacity);
        }
        if self.hidden_size == 0 {
            return Err(ConfigError::ZeroHiddenSize);
        }
        if self.learning_rate <= 0.0 {
            return Err(ConfigError::NonPositiveLearningRate);
        }
        if !(0.0..1.0).contains(&self.rmsprop_beta) {
            return Err(ConfigError::BetaOutOfRange);
        }
        if matches!(self.sampler, SamplerKind::Reverse | SamplerKind::Mixed) {
            if self.target_update_frequency.is_some() {
                return Err(ConfigError::ReverseSamplerWithTargetNetwork);
            }
            if self.double_q {
                return Err(ConfigError::ReverseSamplerWithDoubleQ);
            }
            if self.stride == 0 {
                return Err(ConfigError::ZeroStride);
            }
        }
        Ok(())
    }
}

/// Linear exploration schedule: `start` at frame 0, `end` from
/// `decay_frames` onward.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub end: f64,
    pub decay_frames: u64,
}

impl EpsilonSchedule {
    pub fn value(&self, frame: u64) -> f64 {
        if self.decay_frames == 0 || frame >= self.decay_frames {
            return self.end;
        }
        let t = frame as f64 / self.decay_frames as f64;
        self.start + (self.end - self.start) * t
    }
}

/// Index of the largest entry, ties broken toward the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    debug_assert!(!values.is_empty());
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy: a uniform random action with probability `epsilon`, the
/// greedy action otherwise.
pub fn select_action<R: Rng + ?Sized>(q_values: &[f64], epsilon: f64, rng: &mut R) -> usize {
    debug_assert!(!q_values.is_empty());
    if rng.random::<f64>() < epsilon {
        rng.random_range(0..q_values.len())
    } else {
        argmax(q_values)
    }
}

/// Bellman targets for a batch. Terminal transitions use the bare reward;
/// the rest bootstrap from the target network when present (max for plain
/// DQN, online-argmax/target-eval for double-Q) and from the online network
/// otherwise. Targets carry no gradient.
pub fn compute_targets(
    batch: &[&Transition],
    online: &MlpParams,
    target: Option<&MlpParams>,
    double_q: bool,
    gamma: f64,
) -> Vec<f64> {
    batch
        .iter()
        .map(|t| {
            if t.terminal {
                return t.reward;
            }
            let eval_net = target.unwrap_or(online);
            let bootstrap = if double_q {
                let online_q = online.forward_one(&t.next_state).expect("next state width fixed");
                eval_net.forward_one(&t.next_state).expect("next state width fixed")[argmax(&online_q)]
            } else {
                let q = eval_net.forward_one(&t.next_state).expect("next state width fixed");
                q.iter().copied().fold(f64::NEG_INFINITY, f64::max)
            };
            t.reward + gamma * bootstrap
        })
        .collect()
}

/// Result of one training step: either a gradient update with its loss, or a
/// skip because the configured sampler could not yet fill a batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepOutcome {
    Skipped,
    Updated { loss: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u32,
    pub steps: u32,
    pub ret: f64,
    /// Exploration rate at the first step of the episode.
    pub epsilon: f64,
    /// Mean loss over the episode's gradient updates (0 when none ran).
    pub mean_loss: f64,
    pub updates: u32,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalRecord {
    /// Training episodes completed before this evaluation.
    pub after_episode: u32,
    pub episodes: u32,
    pub mean_return: f64,
    pub min_return: f64,
    pub max_return: f64,
    pub mean_length: f64,
}

/// One agent: online network, optional target copy, replay memory, and the
/// training RNG stream, bound to a private environment instance.
pub struct Trainer {
    config: AgentConfig,
    env_spec: EnvSpec,
    env: Box<dyn Environment>,
    online: MlpParams,
    target: Option<MlpParams>,
    opt: RmsPropState,
    memory: ReplayMemory<Transition>,
    reverse_state: ReverseSamplerState,
    schedule: EpsilonSchedule,
    rng: ChaCha8Rng,
    seed: u64,
    frame: u64,
    grad_steps: u64,
    episodes_done: u32,
    evals_done: u64,
}

impl Trainer {
    pub fn new(config: AgentConfig, env_spec: EnvSpec, seed: u64) -> Result<Self, ConfigError> {
        config.validate()?;
        let env = env_spec.build();
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 0));
        let online = MlpParams::init(env.obs_dim(), config.hidden_size, env.n_actions(), &mut rng);
        let target = (config.target_update_frequency.is_some() || config.double_q).then(|| online.clone());
        let opt = RmsPropState::new(&online, config.learning_rate, config.rmsprop_beta);
        let memory = ReplayMemory::new(config.memory_capacity);
        let reverse_state = ReverseSamplerState::new(config.stride.max(1), config.batch_size);
        let schedule = EpsilonSchedule {
            start: config.epsilon_start,
            end: config.epsilon_end,
            decay_frames: config.epsilon_decay_frames,
        };
        Ok(Trainer {
            config,
            env_spec,
            env,
            online,
            target,
            opt,
            memory,
            reverse_state,
            schedule,
            rng,
            seed,
            frame: 0,
            grad_steps: 0,
            episodes_done: 0,
            evals_done: 0,
        })
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn params(&self) -> &MlpParams {
        &self.online
    }

    pub fn into_params(self) -> MlpParams {
        self.online
    }

    pub fn frames(&self) -> u64 {
        self.frame
    }

    pub fn episodes_done(&self) -> u32 {
        self.episodes_done
    }

    pub fn memory_len(&self) -> usize {
        self.memory.len()
    }

    /// Push the pending transition (if any), draw one batch with the
    /// configured sampler, and apply one RMSprop update. Returns
    /// [`StepOutcome::Skipped`] while the memory is still too short for the
    /// sampler's span.
    pub fn train_step(&mut self, pending: Option<Transition>) -> StepOutcome {
        if let Some(t) = pending {
            self.memory.push_front(t);
        }
        let batch: Vec<&Transition> = match self.config.sampler {
            SamplerKind::Uniform => {
                match self.memory.sample_uniform(0, self.memory.len(), self.config.batch_size, &mut self.rng) {
                    Ok(batch) => batch,
                    Err(_) => return StepOutcome::Skipped,
                }
            }
            SamplerKind::Reverse => match self.memory.sample_reverse(&mut self.reverse_state) {
                Ok(batch) => batch,
                Err(_) => return StepOutcome::Skipped,
            },
            SamplerKind::Mixed => match self.memory.sample_mixed(&mut self.reverse_state, &mut self.rng) {
                Ok(batch) => batch,
                Err(_) => return StepOutcome::Skipped,
            },
        };
        let targets = compute_targets(&batch, &self.online, self.target.as_ref(), self.config.double_q, self.config.gamma);
        let obs: Vec<&[f64]> = batch.iter().map(|t| t.state.as_slice()).collect();
        let actions: Vec<usize> = batch.iter().map(|t| t.action).collect();
        let (grads, loss) =
            nn::backward_mse(&self.online, &obs, &actions, &targets).expect("batch shapes fixed at construction");
        nn::rmsprop_step(&mut self.online, &grads, &mut self.opt);
        self.grad_steps += 1;
        if let Some(freq) = self.config.target_update_frequency {
            if freq > 0 && self.grad_steps.is_multiple_of(freq) {
                self.target = Some(self.online.clone());
            }
        }
        StepOutcome::Updated { loss }
    }

    /// Run one training episode: epsilon-greedy rollout with one train step
    /// per environment step. The fresh transition is pushed before the
    /// sampler runs, so index 0 is always the newest experience.
    pub fn run_episode(&mut self) -> EpisodeRecord {
        let mut obs = self.env.reset(&mut self.rng);
        let epsilon_at_start = self.schedule.value(self.frame);
        let mut ret = 0.0;
        let mut steps = 0u32;
        let mut loss_sum = 0.0;
        let mut updates = 0u32;
        loop {
            let epsilon = self.schedule.value(self.frame);
            let q = self.online.forward_one(&obs).expect("observation width fixed");
            let action = select_action(&q, epsilon, &mut self.rng);
            let step = self.env.step(action).expect("loop stops at terminal");
            let transition = Transition {
                state: obs,
                action,
                reward: step.reward,
                next_state: step.obs.clone(),
                terminal: step.terminal,
            };
            if let StepOutcome::Updated { loss } = self.train_step(Some(transition)) {
                loss_sum += loss;
                updates += 1;
            }
            self.frame += 1;
            ret += step.reward;
            steps += 1;
            obs = step.obs;
            if step.terminal {
                break;
            }
        }
        let episode = self.episodes_done;
        self.episodes_done += 1;
        EpisodeRecord {
            episode,
            steps,
            ret,
            epsilon: epsilon_at_start,
            mean_loss: if updates > 0 { loss_sum / updates as f64 } else { 0.0 },
            updates,
        }
    }

    /// Greedy (epsilon = 0) rollouts on a fresh environment instance, driven
    /// by a dedicated RNG stream so evaluation never perturbs training.
    pub fn evaluate(&mut self, episodes: u32) -> EvalRecord {
        self.evals_done += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(self.seed, self.evals_done));
        let mut env = self.env_spec.build();
        let mut mean_return = 0.0;
        let mut min_return = f64::INFINITY;
        let mut max_return = f64::NEG_INFINITY;
        let mut mean_length = 0.0;
        for _ in 0..episodes {
            let mut obs = env.reset(&mut rng);
            let mut ret = 0.0;
            let mut len = 0u32;
            loop {
                let q = self.online.forward_one(&obs).expect("observation width fixed");
                let action = select_action(&q, 0.0, &mut rng);
                let step = env.step(action).expect("loop stops at terminal");
                ret += step.reward;
                len += 1;
                obs = step.obs;
                if step.terminal {
                    break;
                }
            }
            mean_return += ret;
            min_return = min_return.min(ret);
            max_return = max_return.max(ret);
            mean_length += len as f64;
        }
        if episodes > 0 {
            mean_return /= episodes as f64;
            mean_length /= episodes as f64;
        } else {
            min_return = 0.0;
            max_return = 0.0;
        }
        EvalRecord {
            after_episode: self.episodes_done,
            episodes,
            mean_return,
            min_return,
            max_return,
            mean_length,
        }
    }
}

/// A full training run: agent configuration, environment, episode budget,
/// and the evaluation protocol.
#[derive(Clone, Debug, PartialEq)]
pub struct RunSpec {
    pub agent: AgentConfig,
    pub env: EnvSpec,
    pub episodes: u32,
    /// Evaluate every this many episodes; 0 disables intermediate evals.
    pub eval_every: u32,
    pub eval_episodes: u32,
    /// Greedy test episodes after training completes.
    pub final_test_episodes: u32,
}

/// Everything one seed's run produced, minus wall-clock (the CLI layer adds
/// timing, keeping these records bit-reproducible).
#[derive(Clone, Debug, PartialEq)]
pub struct RunMetrics {
    pub seed: u64,
    pub episodes: Vec<EpisodeRecord>,
    pub evals: Vec<EvalRecord>,
    pub final_test: Option<EvalRecord>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunOutcome {
    pub metrics: RunMetrics,
    pub final_params: MlpParams,
}

/// Callbacks fired as a run progresses; lets callers time episodes or stream
/// progress without owning the loop.
pub trait TrainingObserver {
    fn on_episode(&mut self, record: &EpisodeRecord) {
        let _ = record;
    }
    fn on_eval(&mut self, record: &EvalRecord) {
        let _ = record;
    }
}

/// Observer that ignores every event.
pub struct NullObserver;

impl TrainingObserver for NullObserver {}

/// Train one seed to completion: the episode budget, periodic greedy
/// evaluations, and the final greedy test. Fully reproducible per seed.
pub fn run_training(spec: &RunSpec, seed: u64, observer: &mut dyn TrainingObserver) -> Result<RunOutcome, ConfigError> {
    let mut trainer = Trainer::new(spec.agent.clone(), spec.env.clone(), seed)?;
    let mut metrics = RunMetrics { seed, episodes: Vec::new(), evals: Vec::new(), final_test: None };
    for _ in 0..spec.episodes {
        let record = trainer.run_episode();
        observer.on_episode(&record);
        metrics.episodes.push(record);
        if spec.eval_every > 0 && spec.eval_episodes > 0 && trainer.episodes_done % spec.eval_every == 0 {
            let eval = trainer.evaluate(spec.eval_episodes);
            observer.on_eval(&eval);
            metrics.evals.push(eval);
        }
    }
    if spec.episodes > 0 && spec.final_test_episodes > 0 {
        let eval = trainer.evaluate(spec.final_test_episodes);
        observer.on_eval(&eval);
        metrics.final_test = Some(eval);
    }
    Ok(RunOutcome { metrics, final_params: trainer.into_params() })
}
