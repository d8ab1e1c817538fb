use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};

use rer_cli::config::{check_stride, load_config, StrideCheck, PRESETS};
use rer_cli::metrics::read_evals_csv;
use rer_cli::oracle::{oracle_report, write_oracle_csv, OracleArgs, OracleEnv};
use rer_cli::plot::{write_line_plot, Series};
use rer_cli::runner::{apply_overrides, compare_experiments, resolve_out_dir, run_experiment, RunOverrides};
use rer_core::tabular::BackupOrder;

#[derive(Parser)]
#[command(
    name = "rer",
    about = "Reverse-experience-replay lab: train small Q-learning agents, compare sampling disciplines, and report tabular convergence counts",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train one experiment config (a file path or a bundled preset name).
    Train {
        config: String,
        /// Override the seed list, e.g. --seed 1,2,3
        #[arg(long)]
        seed: Option<String>,
        /// Override the training episode budget.
        #[arg(long)]
        episodes: Option<u32>,
        /// Override the output directory.
        #[arg(long)]
        out: Option<String>,
    },
    /// Train several configs and overlay their evaluation curves.
    Compare {
        configs: Vec<String>,
        #[arg(long)]
        seed: Option<String>,
        #[arg(long)]
        episodes: Option<u32>,
        /// Output root; each config writes into a subdirectory of it.
        #[arg(long, default_value = "runs/compare")]
        out: String,
    },
    /// Count tabular backups to convergence per backup order and seed.
    Oracle {
        /// Environment: chain or gridworld.
        #[arg(long)]
        env: String,
        /// Comma-separated backup orders: reverse, forward, uniform.
        #[arg(long, default_value = "reverse,uniform")]
        orders: String,
        /// Number of seeds.
        #[arg(long, default_value_t = 100)]
        seeds: u64,
        /// Chain length.
        #[arg(long, default_value_t = 10)]
        length: usize,
        /// Gridworld width and height.
        #[arg(long, default_value_t = 4)]
        width: usize,
        #[arg(long, default_value_t = 4)]
        height: usize,
        #[arg(long, default_value_t = 0.99)]
        gamma: f64,
        #[arg(long, default_value_t = 1e-12)]
        tolerance: f64,
        /// Backup budget per seed before giving up.
        #[arg(long, default_value_t = 1_000_000)]
        budget: usize,
        /// Output CSV path.
        #[arg(long, default_value = "oracle.csv")]
        out: String,
    },
    /// Re-plot evaluation or aggregate CSVs into one SVG.
    Plot {
        csvs: Vec<String>,
        #[arg(long, default_value = "plot.svg")]
        out: String,
        #[arg(long, default_value = "greedy evaluation return")]
        title: String,
    },
    /// Parse and validate a config, reporting the effective settings.
    Validate { config: String },
    /// List the bundled preset configs.
    Presets,
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}

fn parse_seed_list(list: &str) -> Result<Vec<u64>> {
    list.split(',')
        .map(|s| s.trim().parse::<u64>().with_context(|| format!("bad seed `{s}`")))
        .collect()
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Train { config, seed, episodes, out } => {
            let mut cfg = load_config(&config)?;
            let overrides = RunOverrides {
                seeds: seed.as_deref().map(parse_seed_list).transpose()?,
                episodes,
                out_dir: out,
            };
            apply_overrides(&mut cfg, &overrides);
            let result = run_experiment(&cfg)?;
            for run in &result.runs {
                let final_text = run
                    .metrics
                    .final_test
                    .as_ref()
                    .map(|e| format!("final test mean {:.2} over {} episodes", e.mean_return, e.episodes))
                    .unwrap_or_else(|| "no final test".into());
                println!(
                    "seed {}: {} episodes in {:.1}s; {}",
                    run.metrics.seed,
                    run.metrics.episodes.len(),
                    run.total_wall_s,
                    final_text
                );
            }
            if let Some(mean) = result.final_mean_return() {
                println!("seed-averaged final test mean return: {mean:.3}");
            }
            println!("outputs in {}", result.out_dir.display());
            Ok(())
        }
        Command::Compare { configs, seed, episodes, out } => {
            if configs.len() < 2 {
                bail!("compare needs at least two configs");
            }
            let seeds = seed.as_deref().map(parse_seed_list).transpose()?;
            let mut loaded = Vec::new();
            for name in &configs {
                let mut cfg = load_config(name)?;
                apply_overrides(&mut cfg, &RunOverrides { seeds: seeds.clone(), episodes, out_dir: None });
                loaded.push(cfg);
            }
            let out_root = resolve_out_dir(&out);
            let results = compare_experiments(&loaded, &out_root)?;
            println!("config, seed-averaged final test mean return");
            for result in &results {
                match result.final_mean_return() {
                    Some(mean) => println!("{}, {:.3}", result.config.name, mean),
                    None => println!("{}, (no final test)", result.config.name),
                }
            }
            println!("merged CSV and overlay plot in {}", out_root.display());
            Ok(())
        }
        Command::Oracle { env, orders, seeds, length, width, height, gamma, tolerance, budget, out } => {
            let env = match env.as_str() {
                "chain" => OracleEnv::Chain { length },
                "gridworld" => {
                    if width < 2 || height < 2 {
                        bail!("gridworld oracle needs width and height of at least 2");
                    }
                    OracleEnv::Gridworld { width, height }
                }
                "mountain-car" => bail!("mountain-car is not enumerable; the oracle needs chain or gridworld"),
                other => bail!("unknown oracle environment `{other}`"),
            };
            let orders = orders
                .split(',')
                .map(|o| match o.trim() {
                    "reverse" => Ok(BackupOrder::Reverse),
                    "forward" => Ok(BackupOrder::Forward),
                    "uniform" => Ok(BackupOrder::Uniform),
                    other => bail!("unknown order `{other}`"),
                })
                .collect::<Result<Vec<_>>>()?;
            let args = OracleArgs { env, orders, seeds, gamma, tolerance, budget };
            let report = oracle_report(&args);
            for s in &report.summary {
                println!(
                    "{} {}: mean backups {:.2} over {} seeds ({:.0}% converged)",
                    report.env_name,
                    s.order,
                    s.mean_backups,
                    seeds,
                    100.0 * s.converged_fraction
                );
            }
            let out = resolve_out_dir(&out);
            if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
                std::fs::create_dir_all(parent)?;
            }
            write_oracle_csv(&out, &report)?;
            println!("report written to {}", out.display());
            Ok(())
        }
        Command::Plot { csvs, out, title } => {
            if csvs.is_empty() {
                bail!("plot needs at least one evaluation CSV");
            }
            let mut series = Vec::new();
            for csv in &csvs {
                let path = PathBuf::from(csv);
                let rows = read_evals_csv(&path).with_context(|| format!("reading {csv}"))?;
                let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| csv.clone());
                series.push(Series {
                    name: stem,
                    points: rows.iter().map(|r| (r.after_episode as f64, r.mean_return)).collect(),
                });
            }
            let out = resolve_out_dir(&out);
            write_line_plot(&out, &title, "training episode", "evaluation return", &series)?;
            println!("plot written to {}", out.display());
            Ok(())
        }
        Command::Validate { config } => {
            let cfg = load_config(&config)?;
            println!("config `{}` is valid", cfg.name);
            println!("env: {:?}", cfg.env);
            println!(
                "agent: sampler {}, lr {}, gamma {}, batch {}, memory {}",
                cfg.agent.sampler, cfg.agent.learning_rate, cfg.agent.gamma, cfg.agent.batch_size, cfg.agent.memory_capacity
            );
            println!(
                "run: {} episodes, eval every {} ({} episodes), final test {} episodes, seeds {:?}",
                cfg.episodes, cfg.eval_every, cfg.eval_episodes, cfg.final_test_episodes, cfg.seeds
            );
            match check_stride(cfg.agent.sampler, cfg.agent.stride, cfg.expected_episode_length()) {
                StrideCheck::Warning(msg) => println!("warning: {msg}"),
                StrideCheck::Ok => println!(
                    "stride {} vs expected episode length {}: ok",
                    cfg.agent.stride,
                    cfg.expected_episode_length()
                ),
                StrideCheck::NotApplicable => {}
            }
            Ok(())
        }
        Command::Presets => {
            for (name, _) in PRESETS {
                println!("{name}");
            }
            Ok(())
        }
    }
}
