//! End-to-end training smoke test: DQN with pure reverse sampling learns the
//! forward policy on a small chain within a fixed episode budget, for every
//! seed checked.

use rer_core::agent::{AgentConfig, SamplerKind, Trainer};
use rer_core::envs::{ChainConfig, EnvSpec};

fn smoke_config() -> AgentConfig {
    AgentConfig {
        gamma: 0.99,
        epsilon_start: 1.0,
        epsilon_end: 0.05,
        epsilon_decay_frames: 2_000,
        batch_size: 8,
        memory_capacity: 4_000,
        sampler: SamplerKind::Reverse,
        stride: 3,
        target_update_frequency: None,
        double_q: false,
        learning_rate: 0.005,
        hidden_size: 16,
        rmsprop_beta: 0.99,
    }
}

#[test]
fn reverse_sampling_dqn_masters_the_chain_on_every_seed() {
    let length = 8;
    let budget = 400;
    for seed in 1..=5u64 {
        let env = EnvSpec::Chain(ChainConfig::new(length));
        let mut trainer = Trainer::new(smoke_config(), env, seed).unwrap();
        let mut solved_at = None;
        for episode in 0..budget {
            trainer.run_episode();
            if (episode + 1) % 10 == 0 {
                let eval = trainer.evaluate(1);
                // Optimal greedy behavior: straight to the terminal state in
                // exactly `length` steps, collecting the terminal reward.
                if eval.mean_length == length as f64 && eval.mean_return == 1.0 {
                    solved_at = Some(episode + 1);
                    break;
                }
            }
        }
        assert!(
            solved_at.is_some(),
            "seed {seed} did not reach greedy-optimal behavior within {budget} episodes"
        );
        println!("seed {seed}: greedy-optimal after {} episodes", solved_at.unwrap());
    }
}
