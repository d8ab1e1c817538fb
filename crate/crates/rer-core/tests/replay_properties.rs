//! Randomized structural properties of the replay memory and its samplers.
//! Items are tagged with their insertion number so index arithmetic can be
//! checked directly: after `n` pushes, the item at index `i` carries id
//! `n - 1 - i`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rer_core::replay::{ReplayMemory, ReverseSamplerState};

fn filled(capacity: usize, count: u64) -> ReplayMemory<u64> {
    let mut mem = ReplayMemory::new(capacity);
    for id in 0..count {
        mem.push_front(id);
    }
    mem
}

#[test]
fn slot_i_always_holds_index_bias_plus_i_stride() {
    let mut rng = ChaCha8Rng::seed_from_u64(100);
    for _ in 0..50 {
        let stride = rng.random_range(1..12);
        let batch = rng.random_range(1..8);
        let len = ((batch - 1) * stride + 2 * stride + 4) as u64;
        let mem = filled(len as usize, len);
        let mut st = ReverseSamplerState::new(stride, batch);
        for _ in 0..3 * stride {
            let bias = st.bias();
            let slots = mem.sample_reverse(&mut st).unwrap();
            for (i, id) in slots.iter().enumerate() {
                assert_eq!(**id, len - 1 - (bias + i * stride) as u64);
            }
        }
    }
}

#[test]
fn bias_cycles_through_even_offsets_with_period_stride() {
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    for _ in 0..20 {
        let stride = rng.random_range(1..15);
        let mem = filled(4 * stride, 4 * stride as u64);
        let mut st = ReverseSamplerState::new(stride, 1);
        let mut seen = Vec::new();
        for _ in 0..2 * stride {
            seen.push(st.bias());
            mem.sample_reverse(&mut st).unwrap();
        }
        let expected: Vec<usize> = (0..stride).map(|k| 2 * k).chain((0..stride).map(|k| 2 * k)).collect();
        assert_eq!(seen, expected, "stride {stride}");
    }
}

#[test]
fn within_a_batch_each_slot_is_stride_insertions_older_than_the_last() {
    let mem = filled(200, 200);
    let mut st = ReverseSamplerState::new(7, 5);
    for _ in 0..30 {
        let slots = mem.sample_reverse(&mut st).unwrap();
        for pair in slots.windows(2) {
            assert_eq!(*pair[0] - *pair[1], 7);
        }
    }
}

#[test]
fn one_push_per_call_walks_every_slot_backward_one_insertion() {
    // The reverse-order mechanism: the cursor advances by 2 while every
    // stored item ages by 1 per push, so between consecutive calls each slot
    // moves to the transition inserted immediately before the one it held.
    let mut mem = ReplayMemory::new(10_000);
    let mut next_id = 0u64;
    let mut push = |mem: &mut ReplayMemory<u64>, n: u64| {
        for _ in 0..n {
            mem.push_front(next_id);
            next_id += 1;
        }
    };
    push(&mut mem, 500);
    let mut st = ReverseSamplerState::new(6, 4);
    let mut previous: Option<Vec<u64>> = None;
    let mut wrapped_after_previous_call = false;
    let mut exact_comparisons = 0;
    for _ in 0..200 {
        let wraps_after_this_call = st.bias() + 2 >= 2 * st.stride();
        let slots: Vec<u64> = mem.sample_reverse(&mut st).unwrap().into_iter().copied().collect();
        if let Some(prev) = previous {
            if !wrapped_after_previous_call {
                for (now, before) in slots.iter().zip(&prev) {
                    assert_eq!(*now, before - 1);
                }
                exact_comparisons += 1;
            }
        }
        previous = Some(slots);
        wrapped_after_previous_call = wraps_after_this_call;
        push(&mut mem, 1);
    }
    assert!(exact_comparisons > 150);
}

#[test]
fn uniform_half_of_mixed_batches_never_meets_the_reverse_cursor() {
    // Simulate interleaved pushes and mixed samples; an item drawn by the
    // uniform half must never be drawn by the reverse half afterwards, since
    // items only age upward past the tail boundary.
    let mut rng = ChaCha8Rng::seed_from_u64(102);
    for trial in 0..20 {
        let stride: usize = rng.random_range(1..6);
        let batch: usize = rng.random_range(1..7);
        let reverse_count = batch.div_ceil(2);
        let mut mem = ReplayMemory::new(100_000);
        let mut st = ReverseSamplerState::new(stride, batch);
        let mut next_id = 0u64;
        let mut uniform_seen = std::collections::HashSet::new();
        for _ in 0..((batch + 1) * stride + 1) {
            mem.push_front(next_id);
            next_id += 1;
        }
        for _ in 0..500 {
            let slots: Vec<u64> = mem.sample_mixed(&mut st, &mut rng).unwrap().into_iter().copied().collect();
            let (reverse_half, uniform_half) = slots.split_at(reverse_count);
            for id in reverse_half {
                assert!(!uniform_seen.contains(id), "trial {trial}: reverse half drew {id} after the uniform half had it");
            }
            uniform_seen.extend(uniform_half.iter().copied());
            mem.push_front(next_id);
            next_id += 1;
        }
    }
}

#[test]
fn reverse_batches_are_reproducible_and_uniform_batches_seed_dependent() {
    let mem = filled(300, 300);
    let reverse_run = || {
        let mut st = ReverseSamplerState::new(5, 4);
        (0..40)
            .flat_map(|_| mem.sample_reverse(&mut st).unwrap().into_iter().copied().collect::<Vec<u64>>())
            .collect::<Vec<u64>>()
    };
    assert_eq!(reverse_run(), reverse_run());

    let uniform_run = |seed: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..40)
            .flat_map(|_| mem.sample_uniform(0, 300, 4, &mut rng).unwrap().into_iter().copied().collect::<Vec<u64>>())
            .collect::<Vec<u64>>()
    };
    assert_eq!(uniform_run(9), uniform_run(9));
    assert_ne!(uniform_run(9), uniform_run(10));
}

#[test]
fn eviction_only_ever_drops_the_oldest_item() {
    let mut rng = ChaCha8Rng::seed_from_u64(103);
    let capacity = 64;
    let mut mem = ReplayMemory::new(capacity);
    let mut next_id = 0u64;
    for _ in 0..1000 {
        for _ in 0..rng.random_range(1..5) {
            mem.push_front(next_id);
            next_id += 1;
        }
        assert!(mem.len() <= capacity);
        // Stored ids are exactly the most recent `len` insertions, in order.
        for i in 0..mem.len() {
            assert_eq!(*mem.get(i).unwrap(), next_id - 1 - i as u64);
        }
    }
}
