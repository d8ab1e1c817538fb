//! CSV emission and aggregation for run metrics. Schemas are fixed, headers
//! are always written, and floats carry 9 significant digits. Aggregates are
//! recomputed from the per-seed files they summarize, so re-deriving them
//! from disk reproduces the aggregate CSV byte for byte.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use rer_core::agent::{EpisodeRecord, EvalRecord, RunMetrics};

/// Format a float with 9 significant digits.
pub fn fmt_float(x: f64) -> String {
    format!("{x:.8e}")
}

pub const EPISODES_HEADER: &str = "episode,steps,return,epsilon,mean_loss,updates";
pub const EVALS_HEADER: &str = "after_episode,episodes,mean_return,min_return,max_return,mean_length";
pub const FINAL_TEST_HEADER: &str = "seed,episodes,mean_return,min_return,max_return,mean_length";
pub const AGGREGATE_HEADER: &str = "after_episode,seeds,mean_return,min_return,max_return,mean_length";

/// One seed's training results plus the wall-clock timings the harness
/// measured around them. Timings stay out of every CSV so reruns remain
/// byte-identical; they are reported on the console instead.
#[derive(Clone, Debug)]
pub struct TimedRun {
    pub metrics: RunMetrics,
    pub episode_wall_s: Vec<f64>,
    pub total_wall_s: f64,
}

pub fn episodes_csv_name(seed: u64) -> String {
    format!("seed_{seed}_episodes.csv")
}

pub fn evals_csv_name(seed: u64) -> String {
    format!("seed_{seed}_evals.csv")
}

pub fn write_episodes_csv(path: &Path, records: &[EpisodeRecord]) -> io::Result<()> {
    let mut out = String::from(EPISODES_HEADER);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.episode,
            r.steps,
            fmt_float(r.ret),
            fmt_float(r.epsilon),
            fmt_float(r.mean_loss),
            r.updates
        ));
    }
    fs::write(path, out)
}

fn eval_row(prefix: String, e: &EvalRecord) -> String {
    format!(
        "{},{},{},{},{},{}\n",
        prefix,
        e.episodes,
        fmt_float(e.mean_return),
        fmt_float(e.min_return),
        fmt_float(e.max_return),
        fmt_float(e.mean_length)
    )
}

pub fn write_evals_csv(path: &Path, records: &[EvalRecord]) -> io::Result<()> {
    let mut out = String::from(EVALS_HEADER);
    out.push('\n');
    for e in records {
        out.push_str(&eval_row(e.after_episode.to_string(), e));
    }
    fs::write(path, out)
}

/// Final greedy test results: one row per seed, then a `mean` row averaging
/// the per-seed statistics.
pub fn write_final_test_csv(path: &Path, rows: &[(u64, EvalRecord)]) -> io::Result<()> {
    let mut out = String::from(FINAL_TEST_HEADER);
    out.push('\n');
    for (seed, e) in rows {
        out.push_str(&eval_row(seed.to_string(), e));
    }
    if !rows.is_empty() {
        let n = rows.len() as f64;
        let mean = |f: fn(&EvalRecord) -> f64| rows.iter().map(|(_, e)| f(e)).sum::<f64>() / n;
        out.push_str(&format!(
            "mean,{},{},{},{},{}\n",
            rows[0].1.episodes,
            fmt_float(mean(|e| e.mean_return)),
            fmt_float(mean(|e| e.min_return)),
            fmt_float(mean(|e| e.max_return)),
            fmt_float(mean(|e| e.mean_length)),
        ));
    }
    fs::write(path, out)
}

/// A parsed evaluation row (shared by per-seed eval CSVs and aggregates).
#[derive(Clone, Debug, PartialEq)]
pub struct EvalRow {
    pub after_episode: u32,
    pub episodes: u32,
    pub mean_return: f64,
    pub min_return: f64,
    pub max_return: f64,
    pub mean_length: f64,
}

pub fn read_evals_csv(path: &Path) -> io::Result<Vec<EvalRow>> {
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if header != EVALS_HEADER && header != AGGREGATE_HEADER {
        return Err(io::Error::new(
            io::ErrorKind::InvalidData,
            format!("{}: unexpected header `{header}`", path.display()),
        ));
    }
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 6 {
            return Err(io::Error::new(
                io::ErrorKind::InvalidData,
                format!("{}: bad row {} `{line}`", path.display(), i + 2),
            ));
        }
        let parse = |s: &str| -> io::Result<f64> {
            s.parse().map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("bad number `{s}`")))
        };
        rows.push(EvalRow {
            after_episode: fields[0]
                .parse()
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("bad episode `{}`", fields[0])))?,
            episodes: fields[1]
                .parse()
                .map_err(|_| io::Error::new(io::ErrorKind::InvalidData, format!("bad count `{}`", fields[1])))?,
            mean_return: parse(fields[2])?,
            min_return: parse(fields[3])?,
            max_return: parse(fields[4])?,
            mean_length: parse(fields[5])?,
        });
    }
    Ok(rows)
}

/// Cross-seed aggregate at each evaluation point: mean, min, and max of the
/// per-seed mean returns plus the mean of the per-seed mean lengths.
#[derive(Clone, Debug, PartialEq)]
pub struct AggregateRow {
    pub after_episode: u32,
    pub seeds: usize,
    pub mean_return: f64,
    pub min_return: f64,
    pub max_return: f64,
    pub mean_length: f64,
}

/// Build the aggregate by reading back the per-seed eval CSVs, so the
/// aggregate is a pure function of the files already on disk.
pub fn aggregate_from_files(paths: &[PathBuf]) -> io::Result<Vec<AggregateRow>> {
    let mut per_seed: Vec<Vec<EvalRow>> = Vec::new();
    for path in paths {
        per_seed.push(read_evals_csv(path)?);
    }
    if per_seed.is_empty() || per_seed[0].is_empty() {
        return Ok(Vec::new());
    }
    let points = per_seed[0].len();
    for rows in &per_seed {
        if rows.len() != points {
            return Err(io::Error::new(io::ErrorKind::InvalidData, "seed eval files disagree on eval points"));
        }
    }
    let mut out = Vec::with_capacity(points);
    for i in 0..points {
        let at = per_seed[0][i].after_episode;
        let means: Vec<f64> = per_seed.iter().map(|rows| rows[i].mean_return).collect();
        let lengths: Vec<f64> = per_seed.iter().map(|rows| rows[i].mean_length).collect();
        out.push(AggregateRow {
            after_episode: at,
            seeds: per_seed.len(),
            mean_return: means.iter().sum::<f64>() / means.len() as f64,
            min_return: means.iter().copied().fold(f64::INFINITY, f64::min),
            max_return: means.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            mean_length: lengths.iter().sum::<f64>() / lengths.len() as f64,
        });
    }
    Ok(out)
}

pub fn write_aggregate_csv(path: &Path, rows: &[AggregateRow]) -> io::Result<()> {
    let mut out = String::from(AGGREGATE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{}\n",
            r.after_episode,
            r.seeds,
            fmt_float(r.mean_return),
            fmt_float(r.min_return),
            fmt_float(r.max_return),
            fmt_float(r.mean_length)
        ));
    }
    fs::write(path, out)
}

/// Append one config's aggregate rows to a merged comparison CSV.
pub fn write_compare_csv(path: &Path, blocks: &[(String, Vec<AggregateRow>)]) -> io::Result<()> {
    let mut file = fs::File::create(path)?;
    writeln!(file, "config,{AGGREGATE_HEADER}")?;
    for (name, rows) in blocks {
        for r in rows {
            writeln!(
                file,
                "{},{},{},{},{},{},{}",
                name,
                r.after_episode,
                r.seeds,
                fmt_float(r.mean_return),
                fmt_float(r.min_return),
                fmt_float(r.max_return),
                fmt_float(r.mean_length)
            )?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_carry_nine_significant_digits() {
        assert_eq!(fmt_float(-200.0), "-2.00000000e2");
        assert_eq!(fmt_float(0.99999), "9.99990000e-1");
        assert_eq!(fmt_float(0.0), "0.00000000e0");
    }

    #[test]
    fn eval_csv_round_trips_through_the_formatter() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("evals.csv");
        let records = vec![
            EvalRecord {
                after_episode: 200,
                episodes: 10,
                mean_return: -42.5,
                min_return: -47.0,
                max_return: -36.0,
                mean_length: 42.5,
            },
            EvalRecord {
                after_episode: 400,
                episodes: 10,
                mean_return: -40.1,
                min_return: -44.0,
                max_return: -37.0,
                mean_length: 40.1,
            },
        ];
        write_evals_csv(&path, &records).unwrap();
        let rows = read_evals_csv(&path).unwrap();
        assert_eq!(rows.len(), 2);
        assert_eq!(rows[0].after_episode, 200);
        assert_eq!(rows[0].mean_return, -42.5);
    }

    #[test]
    fn aggregate_matches_hand_computation_from_files() {
        let dir = tempfile::tempdir().unwrap();
        let mut paths = Vec::new();
        for (seed, offset) in [(1u64, 0.0), (2, -2.0), (3, 4.0)] {
            let path = dir.path().join(episodes_csv_name(seed).replace("episodes", "evals"));
            let records = vec![EvalRecord {
                after_episode: 100,
                episodes: 5,
                mean_return: -40.0 + offset,
                min_return: -50.0,
                max_return: -30.0,
                mean_length: 40.0 - offset,
            }];
            write_evals_csv(&path, &records).unwrap();
            paths.push(path);
        }
        let agg = aggregate_from_files(&paths).unwrap();
        assert_eq!(agg.len(), 1);
        let row = &agg[0];
        assert_eq!(row.seeds, 3);
        assert!((row.mean_return - (-40.0 - 42.0 - 36.0) / 3.0).abs() < 1e-12);
        assert_eq!(row.min_return, -42.0);
        assert_eq!(row.max_return, -36.0);
    }
}
