//! Acceptance suite: every criterion the project must meet, one test per
//! criterion, each printing a PASS/FAIL line with the measured values.
//!
//! Run with:
//!
//! ```bash
//! cargo test -p rer-cli --test acceptance -- --nocapture --test-threads 1
//! ```
//!
//! Criterion 5 trains nine full Mountain Car agents and takes a few minutes;
//! everything else finishes in seconds.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rer_cli::config::load_config;
use rer_cli::runner::run_experiment;
use rer_core::agent::{AgentConfig, SamplerKind};
use rer_core::envs::{ChainConfig, ChainEnv, EnumerableEnv};
use rer_core::nn::{backward_mse, MlpParams};
use rer_core::replay::{ReplayMemory, ReverseSamplerState};
use rer_core::tabular::{
    backups_to_convergence, collect_episode, trajectory_fixed_point, value_iteration, BackupOrder,
    RolloutPolicy,
};

fn report(criterion: &str, pass: bool, detail: &str) {
    println!("criterion {criterion}: {} — {detail}", if pass { "PASS" } else { "FAIL" });
    assert!(pass, "criterion {criterion} failed: {detail}");
}

/// Criterion 1: 600 consecutive reverse samples on a static 10,000-item
/// memory read exactly the indices bias + 300 i with the bias cycling
/// 0, 2, ..., 598, 0, ... in under a second.
#[test]
fn criterion_1_reverse_sampling_conformance() {
    let start = Instant::now();
    let mut memory = ReplayMemory::new(10_000);
    for id in 0..10_000u64 {
        memory.push_front(id);
    }
    let mut state = ReverseSamplerState::new(300, 32);
    for call in 0..600usize {
        let expected_bias = 2 * (call % 300);
        assert_eq!(state.bias(), expected_bias, "bias before call {call}");
        let batch = memory.sample_reverse(&mut state).unwrap();
        assert_eq!(batch.len(), 32);
        for (i, item) in batch.iter().enumerate() {
            let index = expected_bias + 300 * i;
            assert_eq!(**item, 9_999 - index as u64, "call {call} slot {i}");
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "1",
        elapsed < 1.0,
        &format!("600 calls verified index-by-index, bias cycle 0,2,...,598,0,...; {elapsed:.3}s"),
    );
}

/// Criterion 2: at one push per call, every batch slot walks backward exactly
/// one insertion per call (except across bias wraps), with zero tolerance.
#[test]
fn criterion_2_reverse_traversal_mechanism() {
    let mut memory = ReplayMemory::new(100_000);
    let mut next_id = 0u64;
    for _ in 0..2_000 {
        memory.push_front(next_id);
        next_id += 1;
    }
    let mut state = ReverseSamplerState::new(10, 8);
    let mut previous: Option<Vec<u64>> = None;
    let mut wrapped_after_previous = false;
    let mut checked = 0u32;
    for _ in 0..500 {
        let wraps_after_this = state.bias() + 2 >= 2 * state.stride();
        let slots: Vec<u64> = memory.sample_reverse(&mut state).unwrap().into_iter().copied().collect();
        if let Some(before) = previous {
            if !wrapped_after_previous {
                for (slot, (now, then)) in slots.iter().zip(&before).enumerate() {
                    assert_eq!(*now, then - 1, "slot {slot} must walk back one insertion");
                }
                checked += 1;
            }
        }
        previous = Some(slots);
        wrapped_after_previous = wraps_after_this;
        memory.push_front(next_id);
        next_id += 1;
    }
    report("2", checked >= 450, &format!("{checked} consecutive-call comparisons, all exact"));
}

/// Criterion 3: on chains with N transitions, reverse-order backups at
/// learning rate 1 reach the value-iteration oracle (sup-norm < 1e-12) in
/// exactly N backups; uniform sampling needs strictly more on average.
#[test]
fn criterion_3_chain_backup_counts() {
    let start = Instant::now();
    let mut detail = String::new();
    for length in [3usize, 5, 10, 25] {
        let env = ChainEnv::new(ChainConfig::new(length));
        let n_states = EnumerableEnv::n_states(&env);
        let n_actions = EnumerableEnv::n_actions(&env);
        let mut walk_rng = ChaCha8Rng::seed_from_u64(0);
        let trajectory = collect_episode(&env, RolloutPolicy::FixedAction(0), 10 * length, &mut walk_rng);
        assert_eq!(trajectory.len(), length);

        // The convergence target must itself match full value iteration on
        // the visited pairs.
        let oracle = value_iteration(&env, 0.99, 1e-13);
        let target = trajectory_fixed_point(&trajectory, n_states, n_actions, 0.99);
        for t in &trajectory {
            assert!(
                (oracle.q.get(t.state, t.action) - target.get(t.state, t.action)).abs() < 1e-12,
                "fixed point disagrees with value iteration on chain {length}"
            );
        }

        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let reverse = backups_to_convergence(
            &trajectory, n_states, n_actions, BackupOrder::Reverse, 0.99, 1.0, 1e-12, 1_000_000, &mut rng,
        )
        .unwrap();
        assert_eq!(reverse, length, "reverse order must need exactly {length} backups");

        let mut total = 0usize;
        for seed in 0..1000u64 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            total += backups_to_convergence(
                &trajectory, n_states, n_actions, BackupOrder::Uniform, 0.99, 1.0, 1e-12, 1_000_000, &mut rng,
            )
            .unwrap();
        }
        let uniform_mean = total as f64 / 1000.0;
        assert!(
            uniform_mean > length as f64,
            "uniform mean {uniform_mean} must exceed {length}"
        );
        detail.push_str(&format!("N={length}: reverse {reverse}, uniform mean {uniform_mean:.1}; "));
    }
    let elapsed = start.elapsed().as_secs_f64();
    report("3", elapsed < 10.0, &format!("{detail}{elapsed:.2}s"));
}

/// Criterion 4: 200 random small networks pass central-difference gradient
/// checks at relative tolerance 1e-4.
#[test]
fn criterion_4_gradient_oracle() {
    let start = Instant::now();
    let mut checked_partials = 0u64;
    for seed in 0..200u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let obs_dim = rng.random_range(1..=5);
        let hidden = rng.random_range(1..=5);
        let n_actions = rng.random_range(1..=5);
        let batch = rng.random_range(1..=6);
        let mut params = MlpParams::init(obs_dim, hidden, n_actions, &mut rng);
        for b in params.b1.iter_mut().chain(params.b2.iter_mut()) {
            *b = rng.random_range(-0.3..0.3);
        }
        let xs: Vec<Vec<f64>> =
            (0..batch).map(|_| (0..obs_dim).map(|_| rng.random_range(-2.0..2.0)).collect()).collect();
        let obs: Vec<&[f64]> = xs.iter().map(|v| v.as_slice()).collect();
        let actions: Vec<usize> = (0..batch).map(|_| rng.random_range(0..n_actions)).collect();
        let targets: Vec<f64> = (0..batch).map(|_| rng.random_range(-2.0..2.0)).collect();
        let (grads, _) = backward_mse(&params, &obs, &actions, &targets).unwrap();

        let loss_of = |p: &MlpParams| -> f64 {
            let mut sum = 0.0;
            for ((x, &a), &t) in obs.iter().zip(&actions).zip(&targets) {
                let q = p.forward_one(x).unwrap()[a];
                sum += (q - t) * (q - t);
            }
            sum / obs.len() as f64
        };
        type ParamField = fn(&mut MlpParams) -> &mut Vec<f64>;
        let fields: [(ParamField, &Vec<f64>); 4] = [
            (|p| &mut p.w1, &grads.w1),
            (|p| &mut p.b1, &grads.b1),
            (|p| &mut p.w2, &grads.w2),
            (|p| &mut p.b2, &grads.b2),
        ];
        for (field, analytic) in fields {
            for (index, &grad) in analytic.iter().enumerate() {
                let h = 1e-5;
                let mut plus = params.clone();
                field(&mut plus)[index] += h;
                let mut minus = params.clone();
                field(&mut minus)[index] -= h;
                let numeric = (loss_of(&plus) - loss_of(&minus)) / (2.0 * h);
                let diff = (grad - numeric).abs();
                if diff >= 1e-7 {
                    let rel = diff / grad.abs().max(numeric.abs());
                    assert!(rel < 1e-4, "seed {seed}: partial {index} rel error {rel}");
                }
                checked_partials += 1;
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    report(
        "4",
        elapsed < 30.0,
        &format!("200 networks, {checked_partials} partial derivatives within tolerance; {elapsed:.2}s"),
    );
}

/// Criterion 5: Mountain Car at the published hyperparameters, desk scale:
/// 2000 episodes, 3 seeds per algorithm. The seed-averaged final greedy test
/// means must order DQN+RER >= DQN+ER >= DDQN+ER, and RER must actually
/// solve the task (mean episode length < 200) on at least 2 of 3 seeds.
#[test]
fn criterion_5_mountain_car_ordering() {
    let start = Instant::now();
    let dir = tempfile::tempdir().unwrap();
    let mut means = Vec::new();
    let mut rer_solved_seeds = 0usize;
    let mut rer_seed_count = 0usize;
    for preset in ["mountain-car-rer", "mountain-car-dqn", "mountain-car-ddqn"] {
        let mut config = load_config(preset).unwrap();
        config.out_dir = dir.path().join(preset).to_string_lossy().into_owned();
        config.save_checkpoints = false;
        let result = run_experiment(&config).unwrap();
        let finals = result.final_tests();
        assert_eq!(finals.len(), 3, "{preset} must produce 3 final tests");
        if preset == "mountain-car-rer" {
            rer_seed_count = finals.len();
            rer_solved_seeds = finals.iter().filter(|(_, e)| e.mean_length < 200.0).count();
        }
        let mean = result.final_mean_return().unwrap();
        let per_seed: Vec<String> =
            finals.iter().map(|(s, e)| format!("seed {s}: {:.2}", e.mean_return)).collect();
        let early = result
            .aggregate
            .first()
            .map(|row| format!("{:.1} at episode {}", row.mean_return, row.after_episode))
            .unwrap_or_else(|| "n/a".into());
        println!(
            "  {preset}: seed-averaged final mean {mean:.3} ({}); early eval mean {early}",
            per_seed.join(", ")
        );
        means.push(mean);
    }
    let elapsed = start.elapsed().as_secs_f64();
    let (rer, dqn, ddqn) = (means[0], means[1], means[2]);
    let solves = rer_solved_seeds * 3 >= 2 * rer_seed_count; // >= 2 of 3
    let ordered = rer >= dqn && dqn >= ddqn;
    report(
        "5",
        ordered && solves && elapsed < 1_800.0,
        &format!(
            "RER {rer:.3} vs DQN {dqn:.3} vs DDQN {ddqn:.3} (ordering {}), RER solved on {rer_solved_seeds}/{rer_seed_count} seeds; {elapsed:.0}s",
            if ordered { "holds" } else { "violated" }
        ),
    );
}

/// Criterion 6: identical config and seeds reproduce byte-identical CSVs.
#[test]
fn criterion_6_byte_identical_reruns() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = load_config("mountain-car-rer").unwrap();
    // Small but real: enough episodes that sampling, evals, and the final
    // test all execute.
    config.episodes = 60;
    config.eval_every = 20;
    config.eval_episodes = 3;
    config.final_test_episodes = 5;
    config.agent.memory_capacity = 4_000;
    config.agent.stride = 5;
    config.seeds = vec![1, 2];
    let mut csv_sets = Vec::new();
    for attempt in 0..2 {
        let mut owned = config.clone();
        owned.out_dir = dir.path().join(format!("attempt{attempt}")).to_string_lossy().into_owned();
        run_experiment(&owned).unwrap();
        let mut files: Vec<_> = std::fs::read_dir(&owned.out_dir)
            .unwrap()
            .map(|e| e.unwrap().path())
            .filter(|p| p.extension().is_some_and(|e| e == "csv"))
            .collect();
        files.sort();
        let contents: Vec<(String, Vec<u8>)> = files
            .iter()
            .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(p).unwrap()))
            .collect();
        csv_sets.push(contents);
    }
    let names: Vec<&String> = csv_sets[0].iter().map(|(n, _)| n).collect();
    assert_eq!(csv_sets[0].len(), csv_sets[1].len());
    let identical = csv_sets[0] == csv_sets[1];
    report(
        "6",
        identical,
        &format!("{} CSV files byte-identical across reruns ({names:?})", csv_sets[0].len()),
    );
}

/// Criterion 7: reverse/mixed sampling combined with a target network or
/// double-Q targets is rejected at validation.
#[test]
fn criterion_7_config_invariants_enforced() {
    // At the config-file layer.
    let with_target = "env.name = mountain-car\nagent.sampler = reverse\nagent.target_update_frequency = 100\n";
    let with_double = "env.name = mountain-car\nagent.sampler = mixed\nagent.double_q = true\n";
    let file_level = rer_cli::config::parse_config(with_target).is_err()
        && rer_cli::config::parse_config(with_double).is_err();

    // At the agent layer.
    let mut config = AgentConfig { sampler: SamplerKind::Reverse, ..AgentConfig::default() };
    config.target_update_frequency = Some(100);
    let agent_target = config.validate().is_err();
    let mut config = AgentConfig { sampler: SamplerKind::Mixed, ..AgentConfig::default() };
    config.double_q = true;
    let agent_double = config.validate().is_err();

    report(
        "7",
        file_level && agent_target && agent_double,
        "RER+target-network and RER+double-Q rejected at config load and agent validation",
    );
}

/// Criterion 8: the 40M-frame Atari experiment (convolutional dueling
/// networks, frame preprocessing) is out of scope at desk scale and is
/// deliberately not implemented; nothing to verify beyond recording that.
#[test]
fn criterion_8_atari_out_of_scope() {
    report("8", true, "Atari-scale experiment excluded by scope; no assertion to run");
}
