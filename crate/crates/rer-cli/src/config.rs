//! Experiment configuration: a flat `key = value` text format with dotted
//! keys, strict typing, and unknown-key rejection so hyperparameter typos
//! fail loudly instead of silently training the wrong thing.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use rer_core::agent::{AgentConfig, ConfigError as AgentConfigError, RunSpec, SamplerKind};
use rer_core::envs::{Cell, ChainConfig, EnvSpec, GridworldConfig, MountainCarConfig};

/// Full description of one experiment: environment, agent, budgets, seeds,
/// and output location.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub name: String,
    pub env: EnvSpec,
    pub agent: AgentConfig,
    pub episodes: u32,
    pub eval_every: u32,
    pub eval_episodes: u32,
    pub final_test_episodes: u32,
    pub seeds: Vec<u64>,
    pub out_dir: String,
    pub save_checkpoints: bool,
}

#[derive(Debug)]
pub enum LoadError {
    Parse { line: usize, message: String },
    Validation { key: String, message: String },
    Io(std::io::Error),
}

impl fmt::Display for LoadError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LoadError::Parse { line, message } => write!(f, "parse error on line {line}: {message}"),
            LoadError::Validation { key, message } => write!(f, "invalid config key `{key}`: {message}"),
            LoadError::Io(err) => write!(f, "io error: {err}"),
        }
    }
}

impl std::error::Error for LoadError {}

impl From<std::io::Error> for LoadError {
    fn from(err: std::io::Error) -> Self {
        LoadError::Io(err)
    }
}

fn validation(key: &str, message: impl Into<String>) -> LoadError {
    LoadError::Validation { key: key.to_string(), message: message.into() }
}

/// Bundled configurations mirroring the three Mountain Car algorithms.
pub const PRESETS: [(&str, &str); 3] = [
    ("mountain-car-rer", include_str!("../presets/mountain-car-rer.cfg")),
    ("mountain-car-dqn", include_str!("../presets/mountain-car-dqn.cfg")),
    ("mountain-car-ddqn", include_str!("../presets/mountain-car-ddqn.cfg")),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, text)| *text)
}

/// Load a config from a file path, or from the bundled preset of that name
/// when no such file exists.
pub fn load_config(path_or_preset: &str) -> Result<ExperimentConfig, LoadError> {
    let path = Path::new(path_or_preset);
    if path.exists() {
        let text = std::fs::read_to_string(path)?;
        return parse_config(&text);
    }
    if let Some(text) = preset(path_or_preset) {
        return parse_config(text);
    }
    Err(LoadError::Io(std::io::Error::new(
        std::io::ErrorKind::NotFound,
        format!("no config file or preset named `{path_or_preset}` (presets: {})",
                PRESETS.map(|(n, _)| n).join(", ")),
    )))
}

/// Parse config text: `key = value` lines, `#` comments, blank lines ignored.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, LoadError> {
    let mut pairs: Vec<(String, String)> = Vec::new();
    let mut seen = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        };
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(LoadError::Parse { line: line_no, message: format!("expected `key = value`, got `{line}`") });
        };
        let key = key.trim().to_string();
        let value = value.trim().to_string();
        if key.is_empty() || value.is_empty() {
            return Err(LoadError::Parse { line: line_no, message: "empty key or value".into() });
        }
        if let Some(first) = seen.insert(key.clone(), line_no) {
            return Err(LoadError::Parse {
                line: line_no,
                message: format!("duplicate key `{key}` (first set on line {first})"),
            });
        }
        pairs.push((key, value));
    }
    if pairs.is_empty() {
        return Err(LoadError::Parse { line: 0, message: "empty config".into() });
    }
    from_key_values(&pairs)
}

/// Assemble and validate a config from key/value pairs. `env.name` selects
/// the environment; every other key must belong to the chosen environment or
/// to the `agent.` / `run.` groups.
pub fn from_key_values(pairs: &[(String, String)]) -> Result<ExperimentConfig, LoadError> {
    let env_name = pairs
        .iter()
        .find(|(k, _)| k == "env.name")
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| validation("env.name", "missing (expected chain, gridworld, or mountain-car)"))?;

    let mut env = match env_name {
        "chain" => EnvSpec::Chain(ChainConfig::new(8)),
        "gridworld" => EnvSpec::Gridworld(GridworldConfig::new(
            4,
            4,
            Cell::new(0, 0),
            Cell::new(3, 3),
            Cell::new(3, 0),
        )),
        "mountain-car" => EnvSpec::MountainCar(MountainCarConfig::default()),
        other => return Err(validation("env.name", format!("unknown environment `{other}`"))),
    };
    let mut agent = AgentConfig::default();
    let mut name: Option<String> = None;
    let mut out_dir: Option<String> = None;
    let mut episodes = 2_000u32;
    let mut eval_every = 200u32;
    let mut eval_episodes = 10u32;
    let mut final_test_episodes = 100u32;
    let mut seeds: Vec<u64> = vec![1, 2, 3];
    let mut save_checkpoints = true;

    for (key, value) in pairs {
        match key.as_str() {
            "env.name" => {}
            "env.chain_length" => chain_mut(&mut env, key)?.length = parse_min(key, value, 2)?,
            "env.chain_terminal_reward" => chain_mut(&mut env, key)?.terminal_reward = parse_f64(key, value)?,
            "env.chain_step_reward" => chain_mut(&mut env, key)?.step_reward = parse_f64(key, value)?,
            "env.grid_width" => grid_mut(&mut env, key)?.width = parse_min(key, value, 1)?,
            "env.grid_height" => grid_mut(&mut env, key)?.height = parse_min(key, value, 1)?,
            "env.grid_start" => grid_mut(&mut env, key)?.start = parse_cell(key, value)?,
            "env.grid_goal" => grid_mut(&mut env, key)?.goal = parse_cell(key, value)?,
            "env.grid_trap" => grid_mut(&mut env, key)?.trap = parse_cell(key, value)?,
            "env.gravity" => mc_mut(&mut env, key)?.gravity = parse_f64(key, value)?,
            "env.force" => mc_mut(&mut env, key)?.force = parse_f64(key, value)?,
            "env.episode_cap" => mc_mut(&mut env, key)?.episode_cap = parse_min(key, value, 1)?,
            "agent.gamma" => agent.gamma = parse_f64(key, value)?,
            "agent.epsilon_start" => agent.epsilon_start = parse_f64(key, value)?,
            "agent.epsilon_end" => agent.epsilon_end = parse_f64(key, value)?,
            "agent.epsilon_decay_frames" => agent.epsilon_decay_frames = parse_u64(key, value)?,
            "agent.batch_size" => agent.batch_size = parse_min(key, value, 1)?,
            "agent.memory_capacity" => agent.memory_capacity = parse_min(key, value, 1)?,
            "agent.sampler" => {
                agent.sampler = match value.as_str() {
                    "uniform" => SamplerKind::Uniform,
                    "reverse" => SamplerKind::Reverse,
                    "mixed" => SamplerKind::Mixed,
                    other => return Err(validation(key, format!("unknown sampler `{other}`"))),
                }
            }
            "agent.stride" => agent.stride = parse_min(key, value, 1)?,
            "agent.target_update_frequency" => {
                agent.target_update_frequency = if value == "none" { None } else { Some(parse_u64(key, value)?) }
            }
            "agent.double_q" => agent.double_q = parse_bool(key, value)?,
            "agent.learning_rate" => agent.learning_rate = parse_f64(key, value)?,
            "agent.hidden_size" => agent.hidden_size = parse_min(key, value, 1)?,
            "agent.rmsprop_beta" => agent.rmsprop_beta = parse_f64(key, value)?,
            "run.name" => name = Some(value.clone()),
            "run.episodes" => episodes = parse_u32(key, value)?,
            "run.eval_every" => eval_every = parse_u32(key, value)?,
            "run.eval_episodes" => eval_episodes = parse_u32(key, value)?,
            "run.final_test_episodes" => final_test_episodes = parse_u32(key, value)?,
            "run.seeds" => seeds = parse_seeds(key, value)?,
            "run.out_dir" => out_dir = Some(value.clone()),
            "run.save_checkpoints" => save_checkpoints = parse_bool(key, value)?,
            other => return Err(validation(other, "unknown key")),
        }
    }

    if seeds.is_empty() {
        return Err(validation("run.seeds", "at least one seed required"));
    }
    validate_env(&env)?;
    if let Err(err) = agent.validate() {
        return Err(validation(agent_error_key(&err), err.to_string()));
    }

    let name = name.unwrap_or_else(|| env_name.to_string());
    let out_dir = out_dir.unwrap_or_else(|| format!("runs/{name}"));
    Ok(ExperimentConfig {
        name,
        env,
        agent,
        episodes,
        eval_every,
        eval_episodes,
        final_test_episodes,
        seeds,
        out_dir,
        save_checkpoints,
    })
}

impl ExperimentConfig {
    /// Normalized `key = value` listing of every effective setting, sorted by
    /// key. Parsing this listing back reproduces the config exactly.
    pub fn to_key_values(&self) -> Vec<(String, String)> {
        let mut pairs: Vec<(String, String)> = Vec::new();
        let mut push = |k: &str, v: String| pairs.push((k.to_string(), v));
        match &self.env {
            EnvSpec::Chain(cfg) => {
                push("env.name", "chain".into());
                push("env.chain_length", cfg.length.to_string());
                push("env.chain_terminal_reward", cfg.terminal_reward.to_string());
                push("env.chain_step_reward", cfg.step_reward.to_string());
            }
            EnvSpec::Gridworld(cfg) => {
                push("env.name", "gridworld".into());
                push("env.grid_width", cfg.width.to_string());
                push("env.grid_height", cfg.height.to_string());
                push("env.grid_start", format!("{},{}", cfg.start.x, cfg.start.y));
                push("env.grid_goal", format!("{},{}", cfg.goal.x, cfg.goal.y));
                push("env.grid_trap", format!("{},{}", cfg.trap.x, cfg.trap.y));
            }
            EnvSpec::MountainCar(cfg) => {
                push("env.name", "mountain-car".into());
                push("env.gravity", cfg.gravity.to_string());
                push("env.force", cfg.force.to_string());
                push("env.episode_cap", cfg.episode_cap.to_string());
            }
        }
        push("agent.gamma", self.agent.gamma.to_string());
        push("agent.epsilon_start", self.agent.epsilon_start.to_string());
        push("agent.epsilon_end", self.agent.epsilon_end.to_string());
        push("agent.epsilon_decay_frames", self.agent.epsilon_decay_frames.to_string());
        push("agent.batch_size", self.agent.batch_size.to_string());
        push("agent.memory_capacity", self.agent.memory_capacity.to_string());
        push("agent.sampler", self.agent.sampler.to_string());
        push("agent.stride", self.agent.stride.to_string());
        push(
            "agent.target_update_frequency",
            self.agent.target_update_frequency.map_or_else(|| "none".into(), |f| f.to_string()),
        );
        push("agent.double_q", self.agent.double_q.to_string());
        push("agent.learning_rate", self.agent.learning_rate.to_string());
        push("agent.hidden_size", self.agent.hidden_size.to_string());
        push("agent.rmsprop_beta", self.agent.rmsprop_beta.to_string());
        push("run.name", self.name.clone());
        push("run.episodes", self.episodes.to_string());
        push("run.eval_every", self.eval_every.to_string());
        push("run.eval_episodes", self.eval_episodes.to_string());
        push("run.final_test_episodes", self.final_test_episodes.to_string());
        push("run.seeds", self.seeds.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
        push("run.out_dir", self.out_dir.clone());
        push("run.save_checkpoints", self.save_checkpoints.to_string());
        pairs.sort();
        pairs
    }

    pub fn run_spec(&self) -> RunSpec {
        RunSpec {
            agent: self.agent.clone(),
            env: self.env.clone(),
            episodes: self.episodes,
            eval_every: self.eval_every,
            eval_episodes: self.eval_episodes,
            final_test_episodes: self.final_test_episodes,
        }
    }

    /// Expected mean episode length before any training has happened: the
    /// environment's step cap (episodes start out maximally long on sparse
    /// tasks). Used for the load-time stride check.
    pub fn expected_episode_length(&self) -> f64 {
        match &self.env {
            EnvSpec::Chain(cfg) => cfg.episode_cap() as f64,
            EnvSpec::Gridworld(cfg) => cfg.episode_cap() as f64,
            EnvSpec::MountainCar(cfg) => cfg.episode_cap as f64,
        }
    }
}

fn validate_env(env: &EnvSpec) -> Result<(), LoadError> {
    match env {
        EnvSpec::Chain(cfg) => {
            if cfg.length < 2 {
                return Err(validation("env.chain_length", "chain length must be at least 2"));
            }
        }
        EnvSpec::Gridworld(cfg) => {
            let inside = |c: Cell| c.x < cfg.width && c.y < cfg.height;
            if !inside(cfg.start) || !inside(cfg.goal) || !inside(cfg.trap) {
                return Err(validation("env.grid_start", "start/goal/trap must lie inside the grid"));
            }
            if cfg.goal == cfg.trap {
                return Err(validation("env.grid_trap", "goal and trap must differ"));
            }
            if cfg.start == cfg.goal || cfg.start == cfg.trap {
                return Err(validation("env.grid_start", "start must not be a terminate cell"));
            }
        }
        EnvSpec::MountainCar(cfg) => {
            if cfg.gravity <= 0.0 || cfg.force <= 0.0 {
                return Err(validation("env.gravity", "gravity and force must be positive"));
            }
        }
    }
    Ok(())
}

fn agent_error_key(err: &AgentConfigError) -> &'static str {
    match err {
        AgentConfigError::ReverseSamplerWithTargetNetwork => "agent.target_update_frequency",
        AgentConfigError::ReverseSamplerWithDoubleQ => "agent.double_q",
        AgentConfigError::GammaOutOfRange => "agent.gamma",
        AgentConfigError::EpsilonOutOfRange => "agent.epsilon_start",
        AgentConfigError::ZeroBatchSize => "agent.batch_size",
        AgentConfigError::ZeroMemoryCapacity => "agent.memory_capacity",
        AgentConfigError::ZeroStride => "agent.stride",
        AgentConfigError::ZeroHiddenSize => "agent.hidden_size",
        AgentConfigError::NonPositiveLearningRate => "agent.learning_rate",
        AgentConfigError::BetaOutOfRange => "agent.rmsprop_beta",
    }
}

fn chain_mut<'a>(env: &'a mut EnvSpec, key: &str) -> Result<&'a mut ChainConfig, LoadError> {
    match env {
        EnvSpec::Chain(cfg) => Ok(cfg),
        _ => Err(validation(key, "only applies to env.name = chain")),
    }
}

fn grid_mut<'a>(env: &'a mut EnvSpec, key: &str) -> Result<&'a mut GridworldConfig, LoadError> {
    match env {
        EnvSpec::Gridworld(cfg) => Ok(cfg),
        _ => Err(validation(key, "only applies to env.name = gridworld")),
    }
}

fn mc_mut<'a>(env: &'a mut EnvSpec, key: &str) -> Result<&'a mut MountainCarConfig, LoadError> {
    match env {
        EnvSpec::MountainCar(cfg) => Ok(cfg),
        _ => Err(validation(key, "only applies to env.name = mountain-car")),
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, LoadError> {
    value.parse().map_err(|_| validation(key, format!("`{value}` is not a number")))
}

fn parse_u64(key: &str, value: &str) -> Result<u64, LoadError> {
    value.parse().map_err(|_| validation(key, format!("`{value}` is not a non-negative integer")))
}

fn parse_u32(key: &str, value: &str) -> Result<u32, LoadError> {
    value.parse().map_err(|_| validation(key, format!("`{value}` is not a non-negative integer")))
}

fn parse_min(key: &str, value: &str, min: usize) -> Result<usize, LoadError> {
    let parsed: usize = value.parse().map_err(|_| validation(key, format!("`{value}` is not an integer")))?;
    if parsed < min {
        return Err(validation(key, format!("must be at least {min}")));
    }
    Ok(parsed)
}

fn parse_bool(key: &str, value: &str) -> Result<bool, LoadError> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(validation(key, format!("`{other}` is not true/false"))),
    }
}

fn parse_cell(key: &str, value: &str) -> Result<Cell, LoadError> {
    let Some((x, y)) = value.split_once(',') else {
        return Err(validation(key, format!("`{value}` is not `x,y`")));
    };
    let x = x.trim().parse().map_err(|_| validation(key, "x must be an integer"))?;
    let y = y.trim().parse().map_err(|_| validation(key, "y must be an integer"))?;
    Ok(Cell::new(x, y))
}

fn parse_seeds(key: &str, value: &str) -> Result<Vec<u64>, LoadError> {
    value
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| validation(key, format!("`{s}` is not a seed"))))
        .collect()
}

/// Result of checking the stride against an episode-length estimate. The
/// stride must not be a multiple of the mean episode length, or one batch
/// would keep hitting similar states from consecutive episodes.
#[derive(Clone, Debug, PartialEq)]
pub enum StrideCheck {
    Ok,
    Warning(String),
    NotApplicable,
}

pub fn check_stride(sampler: SamplerKind, stride: usize, mean_episode_length: f64) -> StrideCheck {
    if !matches!(sampler, SamplerKind::Reverse | SamplerKind::Mixed) {
        return StrideCheck::NotApplicable;
    }
    let rounded = mean_episode_length.round();
    if !(2.0..=usize::MAX as f64).contains(&rounded) {
        return StrideCheck::NotApplicable;
    }
    let len = rounded as usize;
    let remainder = stride % len;
    if remainder <= 1 || remainder + 1 >= len {
        StrideCheck::Warning(format!(
            "stride {stride} is within 1 of a multiple of the mean episode length {mean_episode_length:.1}; \
             batches would keep sampling similar states from consecutive episodes"
        ))
    } else {
        StrideCheck::Ok
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn preset_rer_matches_the_published_hyperparameters() {
        let cfg = load_config("mountain-car-rer").unwrap();
        assert_eq!(cfg.agent.learning_rate, 0.0035);
        assert_eq!(cfg.agent.stride, 300);
        assert_eq!(cfg.agent.gamma, 0.99999);
        assert_eq!(cfg.agent.memory_capacity, 50_000);
        assert_eq!(cfg.agent.batch_size, 32);
        assert_eq!(cfg.agent.sampler, SamplerKind::Mixed);
        assert_eq!(cfg.agent.target_update_frequency, None);
        assert!(!cfg.agent.double_q);
        assert_eq!(cfg.episodes, 2_000);
        assert_eq!(cfg.final_test_episodes, 100);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
    }

    #[test]
    fn reverse_sampler_with_target_network_fails_validation() {
        let text = "env.name = mountain-car\nagent.sampler = reverse\nagent.target_update_frequency = 100\n";
        match parse_config(text) {
            Err(LoadError::Validation { key, .. }) => assert_eq!(key, "agent.target_update_frequency"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn empty_file_is_a_parse_error() {
        assert!(matches!(parse_config(""), Err(LoadError::Parse { .. })));
        assert!(matches!(parse_config("# only comments\n\n"), Err(LoadError::Parse { .. })));
    }

    #[test]
    fn unknown_keys_are_rejected_with_the_offending_name() {
        let text = "env.name = mountain-car\nagent.learning_rte = 0.0025\n";
        match parse_config(text) {
            Err(LoadError::Validation { key, .. }) => assert_eq!(key, "agent.learning_rte"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn keys_for_the_wrong_environment_are_rejected() {
        let text = "env.name = mountain-car\nenv.chain_length = 5\n";
        match parse_config(text) {
            Err(LoadError::Validation { key, .. }) => assert_eq!(key, "env.chain_length"),
            other => panic!("expected validation error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_keys_are_parse_errors() {
        let text = "env.name = chain\nrun.episodes = 5\nrun.episodes = 6\n";
        assert!(matches!(parse_config(text), Err(LoadError::Parse { line: 3, .. })));
    }

    #[test]
    fn normalized_key_values_round_trip() {
        for (name, _) in PRESETS {
            let cfg = load_config(name).unwrap();
            let rebuilt = from_key_values(&cfg.to_key_values()).unwrap();
            assert_eq!(rebuilt, cfg, "round trip failed for preset {name}");
        }
    }

    #[test]
    fn stride_checks_flag_multiples_of_the_episode_length() {
        assert_eq!(check_stride(SamplerKind::Mixed, 300, 878.5), StrideCheck::Ok);
        assert!(matches!(check_stride(SamplerKind::Mixed, 400, 200.0), StrideCheck::Warning(_)));
        assert!(matches!(check_stride(SamplerKind::Reverse, 300, 150.0), StrideCheck::Warning(_)));
        assert_eq!(check_stride(SamplerKind::Uniform, 400, 200.0), StrideCheck::NotApplicable);
        // Off-by-one near a multiple still warns.
        assert!(matches!(check_stride(SamplerKind::Mixed, 301, 150.0), StrideCheck::Warning(_)));
    }

    #[test]
    fn gridworld_defaults_parse_and_validate() {
        let cfg = parse_config("env.name = gridworld\nrun.episodes = 10\n").unwrap();
        match &cfg.env {
            EnvSpec::Gridworld(g) => {
                assert_eq!((g.width, g.height), (4, 4));
                assert_eq!(g.goal, Cell::new(3, 3));
            }
            other => panic!("wrong env {other:?}"),
        }
    }
}
