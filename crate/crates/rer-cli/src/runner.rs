//! Experiment orchestration: run every seed as an isolated replica, then
//! write the per-seed CSVs, the cross-seed aggregate, the final-test table,
//! checkpoints, the plot, and the manifest into one output directory.

use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use rer_core::agent::{run_training, EpisodeRecord, EvalRecord, RunOutcome, TrainingObserver};

use crate::config::{check_stride, ExperimentConfig, StrideCheck};
use crate::manifest::write_manifest;
use crate::metrics::{
    aggregate_from_files, episodes_csv_name, evals_csv_name, write_aggregate_csv, write_compare_csv,
    write_episodes_csv, write_evals_csv, write_final_test_csv, AggregateRow, TimedRun,
};
use crate::plot::{write_line_plot, Series};

/// Environment variable that anchors relative output directories.
pub const OUT_ROOT_ENV: &str = "RER_OUT_ROOT";

/// Marker file left behind when a run did not complete cleanly.
pub const PARTIAL_MARKER: &str = ".partial";

#[derive(Clone, Debug, Default)]
pub struct RunOverrides {
    pub seeds: Option<Vec<u64>>,
    pub episodes: Option<u32>,
    pub out_dir: Option<String>,
}

pub fn apply_overrides(config: &mut ExperimentConfig, overrides: &RunOverrides) {
    if let Some(seeds) = &overrides.seeds {
        config.seeds = seeds.clone();
    }
    if let Some(episodes) = overrides.episodes {
        config.episodes = episodes;
    }
    if let Some(out_dir) = &overrides.out_dir {
        config.out_dir = out_dir.clone();
    }
}

/// Resolve an output directory: absolute paths pass through, relative paths
/// are anchored at `RER_OUT_ROOT` when set.
pub fn resolve_out_dir(dir: &str) -> PathBuf {
    let path = PathBuf::from(dir);
    if path.is_absolute() {
        return path;
    }
    match std::env::var_os(OUT_ROOT_ENV) {
        Some(root) => PathBuf::from(root).join(path),
        None => path,
    }
}

#[derive(Debug)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub out_dir: PathBuf,
    pub runs: Vec<TimedRun>,
    pub aggregate: Vec<AggregateRow>,
}

impl ExperimentResult {
    /// Final greedy-test record per seed, in seed order.
    pub fn final_tests(&self) -> Vec<(u64, &EvalRecord)> {
        self.runs
            .iter()
            .filter_map(|run| run.metrics.final_test.as_ref().map(|e| (run.metrics.seed, e)))
            .collect()
    }

    /// Mean over seeds of the final-test mean returns.
    pub fn final_mean_return(&self) -> Option<f64> {
        let finals = self.final_tests();
        if finals.is_empty() {
            return None;
        }
        Some(finals.iter().map(|(_, e)| e.mean_return).sum::<f64>() / finals.len() as f64)
    }
}

struct TimingObserver {
    started: Instant,
    last: Instant,
    episode_wall_s: Vec<f64>,
}

impl TimingObserver {
    fn new() -> Self {
        let now = Instant::now();
        TimingObserver { started: now, last: now, episode_wall_s: Vec::new() }
    }
}

impl TrainingObserver for TimingObserver {
    fn on_episode(&mut self, _record: &EpisodeRecord) {
        let now = Instant::now();
        self.episode_wall_s.push(now.duration_since(self.last).as_secs_f64());
        self.last = now;
    }
}

/// Run every seed and write all outputs. On any seed failure a
/// `.partial` marker is left in the output directory and the error is
/// returned; outputs written so far are retained.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let out_dir = resolve_out_dir(&config.out_dir);
    std::fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let marker = out_dir.join(PARTIAL_MARKER);
    let _ = std::fs::remove_file(&marker);
    write_manifest(&out_dir.join("manifest.txt"), config)?;

    let spec = config.run_spec();
    let mut results: Vec<std::thread::Result<(Result<RunOutcome, _>, TimingObserver)>> = Vec::new();
    std::thread::scope(|scope| {
        let handles: Vec<_> = config
            .seeds
            .iter()
            .map(|&seed| {
                let spec = &spec;
                scope.spawn(move || {
                    let mut observer = TimingObserver::new();
                    let outcome = run_training(spec, seed, &mut observer);
                    (outcome, observer)
                })
            })
            .collect();
        for handle in handles {
            results.push(handle.join());
        }
    });

    let mut runs = Vec::new();
    let mut failures = Vec::new();
    for (&seed, joined) in config.seeds.iter().zip(results) {
        match joined {
            Ok((Ok(outcome), observer)) => {
                let total_wall_s = observer.started.elapsed().as_secs_f64();
                runs.push((seed, outcome, observer.episode_wall_s, total_wall_s));
            }
            Ok((Err(err), _)) => failures.push(format!("seed {seed}: invalid config: {err}")),
            Err(_) => failures.push(format!("seed {seed}: training panicked")),
        }
    }
    if !failures.is_empty() {
        std::fs::write(&marker, failures.join("\n") + "\n")?;
        bail!("{} of {} seeds failed; partial outputs kept in {}", failures.len(), config.seeds.len(), out_dir.display());
    }

    let mut eval_paths = Vec::new();
    let mut final_rows = Vec::new();
    let mut timed_runs = Vec::new();
    for (seed, outcome, episode_wall_s, total_wall_s) in runs {
        let episodes_path = out_dir.join(episodes_csv_name(seed));
        write_episodes_csv(&episodes_path, &outcome.metrics.episodes)?;
        let evals_path = out_dir.join(evals_csv_name(seed));
        write_evals_csv(&evals_path, &outcome.metrics.evals)?;
        eval_paths.push(evals_path);
        if let Some(final_test) = &outcome.metrics.final_test {
            final_rows.push((seed, final_test.clone()));
        }
        if config.save_checkpoints {
            crate::checkpoint::save_checkpoint(&out_dir.join(format!("seed_{seed}.ckpt")), &outcome.final_params, seed)?;
        }
        timed_runs.push(TimedRun { metrics: outcome.metrics, episode_wall_s, total_wall_s });
    }

    let aggregate = aggregate_from_files(&eval_paths)?;
    write_aggregate_csv(&out_dir.join("aggregate.csv"), &aggregate)?;
    if !final_rows.is_empty() {
        write_final_test_csv(&out_dir.join("final_test.csv"), &final_rows)?;
    }
    if !aggregate.is_empty() {
        let mut series: Vec<Series> = timed_runs
            .iter()
            .map(|run| Series {
                name: format!("seed {}", run.metrics.seed),
                points: run.metrics.evals.iter().map(|e| (e.after_episode as f64, e.mean_return)).collect(),
            })
            .collect();
        series.push(Series {
            name: "mean".into(),
            points: aggregate.iter().map(|r| (r.after_episode as f64, r.mean_return)).collect(),
        });
        write_line_plot(
            &out_dir.join("plot.svg"),
            &format!("{}: greedy evaluation return", config.name),
            "training episode",
            "evaluation return",
            &series,
        )?;
    }

    report_observed_stride(config, &timed_runs);
    Ok(ExperimentResult { config: config.clone(), out_dir, runs: timed_runs, aggregate })
}

/// Stride rule re-checked against the episode lengths actually observed.
fn report_observed_stride(config: &ExperimentConfig, runs: &[TimedRun]) {
    let (mut steps, mut count) = (0u64, 0u64);
    for run in runs {
        for e in &run.metrics.episodes {
            steps += e.steps as u64;
            count += 1;
        }
    }
    if count == 0 {
        return;
    }
    let mean_len = steps as f64 / count as f64;
    if let StrideCheck::Warning(msg) = check_stride(config.agent.sampler, config.agent.stride, mean_len) {
        eprintln!("warning: {msg} (observed over {count} training episodes)");
    }
}

/// Run several configs into subdirectories of `out_root`, then write the
/// merged comparison CSV and the overlay plot.
pub fn compare_experiments(configs: &[ExperimentConfig], out_root: &Path) -> Result<Vec<ExperimentResult>> {
    std::fs::create_dir_all(out_root)?;
    let mut results = Vec::new();
    for config in configs {
        let mut owned = config.clone();
        owned.out_dir = out_root.join(&config.name).to_string_lossy().into_owned();
        results.push(run_experiment(&owned)?);
    }
    let blocks: Vec<(String, Vec<AggregateRow>)> =
        results.iter().map(|r| (r.config.name.clone(), r.aggregate.clone())).collect();
    write_compare_csv(&out_root.join("compare.csv"), &blocks)?;
    let series: Vec<Series> = results
        .iter()
        .map(|r| Series {
            name: r.config.name.clone(),
            points: r.aggregate.iter().map(|row| (row.after_episode as f64, row.mean_return)).collect(),
        })
        .collect();
    write_line_plot(
        &out_root.join("compare.svg"),
        "greedy evaluation return (mean over seeds)",
        "training episode",
        "evaluation return",
        &series,
    )?;
    Ok(results)
}
