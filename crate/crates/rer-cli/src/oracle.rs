//! Tabular convergence reports: how many single-transition backups each
//! backup order needs to reach the trajectory's fixed point, per seed, on an
//! enumerable environment.

use std::io::{self, Write};
use std::path::Path;

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rer_core::envs::{Cell, ChainConfig, ChainEnv, EnumerableEnv, GridworldConfig, GridworldEnv};
use rer_core::seeding::stream_seed;
use rer_core::tabular::{backups_to_convergence, collect_episode, BackupOrder, RolloutPolicy, Transition};

#[derive(Clone, Debug)]
pub enum OracleEnv {
    Chain { length: usize },
    Gridworld { width: usize, height: usize },
}

impl OracleEnv {
    pub fn name(&self) -> String {
        match self {
            OracleEnv::Chain { length } => format!("chain-{length}"),
            OracleEnv::Gridworld { width, height } => format!("gridworld-{width}x{height}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleArgs {
    pub env: OracleEnv,
    pub orders: Vec<BackupOrder>,
    pub seeds: u64,
    pub gamma: f64,
    pub tolerance: f64,
    pub budget: usize,
}

impl Default for OracleArgs {
    fn default() -> Self {
        OracleArgs {
            env: OracleEnv::Chain { length: 10 },
            orders: vec![BackupOrder::Reverse, BackupOrder::Uniform],
            seeds: 100,
            gamma: 0.99,
            tolerance: 1e-12,
            budget: 1_000_000,
        }
    }
}

#[derive(Clone, Debug)]
pub struct OracleRow {
    pub order: BackupOrder,
    pub seed: u64,
    /// Backups to convergence, or `None` when the budget ran out.
    pub backups: Option<usize>,
}

#[derive(Clone, Debug)]
pub struct OrderSummary {
    pub order: BackupOrder,
    /// Mean backups over converged seeds.
    pub mean_backups: f64,
    pub converged_fraction: f64,
}

#[derive(Clone, Debug)]
pub struct OracleReport {
    pub env_name: String,
    pub rows: Vec<OracleRow>,
    pub summary: Vec<OrderSummary>,
}

impl OracleReport {
    pub fn mean_backups(&self, order: BackupOrder) -> Option<f64> {
        self.summary.iter().find(|s| s.order == order).map(|s| s.mean_backups)
    }
}

/// The trajectory replayed for seed `seed`: the canonical forward walk on the
/// chain (the episode the backup-order claims are about), a seeded random
/// walk on the gridworld.
fn trajectory_for(env: &OracleEnv, seed: u64) -> (Vec<Transition>, usize, usize) {
    match env {
        OracleEnv::Chain { length } => {
            let chain = ChainEnv::new(ChainConfig::new(*length));
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 0));
            let traj = collect_episode(&chain, RolloutPolicy::FixedAction(0), 10 * length, &mut rng);
            (traj, EnumerableEnv::n_states(&chain), EnumerableEnv::n_actions(&chain))
        }
        OracleEnv::Gridworld { width, height } => {
            let cfg = GridworldConfig::new(
                *width,
                *height,
                Cell::new(0, 0),
                Cell::new(width - 1, height - 1),
                Cell::new(width - 1, 0),
            );
            let cap = cfg.episode_cap();
            let grid = GridworldEnv::new(cfg);
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 0));
            let traj = collect_episode(&grid, RolloutPolicy::UniformRandom, cap, &mut rng);
            (traj, EnumerableEnv::n_states(&grid), EnumerableEnv::n_actions(&grid))
        }
    }
}

pub fn oracle_report(args: &OracleArgs) -> OracleReport {
    let mut rows = Vec::new();
    for &order in &args.orders {
        for seed in 0..args.seeds {
            let (trajectory, n_states, n_actions) = trajectory_for(&args.env, seed);
            let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, 1));
            let backups = backups_to_convergence(
                &trajectory,
                n_states,
                n_actions,
                order,
                args.gamma,
                1.0,
                args.tolerance,
                args.budget,
                &mut rng,
            )
            .ok();
            rows.push(OracleRow { order, seed, backups });
        }
    }
    let summary = args
        .orders
        .iter()
        .map(|&order| {
            let converged: Vec<usize> =
                rows.iter().filter(|r| r.order == order).filter_map(|r| r.backups).collect();
            let total = rows.iter().filter(|r| r.order == order).count();
            OrderSummary {
                order,
                mean_backups: if converged.is_empty() {
                    f64::NAN
                } else {
                    converged.iter().sum::<usize>() as f64 / converged.len() as f64
                },
                converged_fraction: converged.len() as f64 / total.max(1) as f64,
            }
        })
        .collect();
    OracleReport { env_name: args.env.name(), rows, summary }
}

/// CSV emission: one row per (order, seed), then one `mean` row per order.
pub fn write_oracle_csv(path: &Path, report: &OracleReport) -> io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    writeln!(file, "env,order,seed,backups,converged")?;
    for row in &report.rows {
        writeln!(
            file,
            "{},{},{},{},{}",
            report.env_name,
            row.order,
            row.seed,
            row.backups.map_or_else(|| "".into(), |b| b.to_string()),
            row.backups.is_some()
        )?;
    }
    for s in &report.summary {
        writeln!(
            file,
            "{},{},mean,{},{}",
            report.env_name,
            s.order,
            crate::metrics::fmt_float(s.mean_backups),
            crate::metrics::fmt_float(s.converged_fraction)
        )?;
    }
    Ok(())
}
