//! Replay memory with push-front insertion and three sampling disciplines:
//! uniform, reverse (a rotating bias/stride cursor), and a mixed scheme that
//! fills half of each mini-batch reverse-ordered and the other half uniformly
//! from the old tail of the memory.
//!
//! New transitions always enter at index 0, so index equals age in
//! insertions. Reverse sampling reads slots `bias + i * stride`; because every
//! stored item's index grows by one per insertion while the cursor grows by
//! two per call, consecutive calls at one-push-per-call cadence revisit each
//! slot's trajectory one step further into the past.

use alloc::collections::VecDeque;
use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

/// One interaction record: the atom stored in replay memory.
#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    /// Marks `next_state` as a terminate state.
    pub terminal: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SampleError {
    /// The memory is shorter than the span the sampler needs. Callers should
    /// defer sampling until enough transitions have been stored.
    InsufficientMemory { required: usize, len: usize },
    /// Uniform sampling over a degenerate index range.
    EmptyRange { lo: usize, hi: usize },
}

impl fmt::Display for SampleError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SampleError::InsufficientMemory { required, len } => {
                write!(f, "memory holds {len} transitions but the sample needs {required}")
            }
            SampleError::EmptyRange { lo, hi } => {
                write!(f, "empty index range [{lo}, {hi})")
            }
        }
    }
}

/// Cursor state for reverse sampling: an even rotating `bias` plus the fixed
/// index `stride` between the slots of one mini-batch.
///
/// `bias` always stays in `{0, 2, 4, ..., 2 * stride - 2}`: each successful
/// sample advances it by two, wrapping to zero once it would reach
/// `2 * stride`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReverseSamplerState {
    bias: usize,
    stride: usize,
    batch_size: usize,
}

impl ReverseSamplerState {
    pub fn new(stride: usize, batch_size: usize) -> Self {
        assert!(stride >= 1, "stride must be positive");
        assert!(batch_size >= 1, "batch size must be positive");
        ReverseSamplerState { bias: 0, stride, batch_size }
    }

    pub fn bias(&self) -> usize {
        self.bias
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn batch_size(&self) -> usize {
        self.batch_size
    }

    fn advance(&mut self) {
        if self.bias + 2 < 2 * self.stride {
            self.bias += 2;
        } else {
            self.bias = 0;
        }
    }
}

/// Capacity-bounded sequence with newest item at index 0.
#[derive(Clone, Debug)]
pub struct ReplayMemory<T> {
    items: VecDeque<T>,
    capacity: usize,
}

impl<T> ReplayMemory<T> {
    pub fn new(capacity: usize) -> Self {
        assert!(capacity > 0, "capacity must be positive");
        ReplayMemory { items: VecDeque::with_capacity(capacity), capacity }
    }

    /// Insert at index 0, shifting every stored item one index older and
    /// silently evicting the oldest item once the memory is full.
    pub fn push_front(&mut self, item: T) {
        if self.items.len() == self.capacity {
            self.items.pop_back();
        }
        self.items.push_front(item);
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn get(&self, index: usize) -> Option<&T> {
        self.items.get(index)
    }

    pub fn iter(&self) -> impl Iterator<Item = &T> {
        self.items.iter()
    }

    /// Reverse-order mini-batch: slot `i` holds the item at index
    /// `bias + i * stride`, then the cursor rotates. On
    /// [`SampleError::InsufficientMemory`] the cursor is left untouched so the
    /// caller can retry once more transitions arrive.
    pub fn sample_reverse(&self, state: &mut ReverseSamplerState) -> Result<Vec<&T>, SampleError> {
        let batch = self.reverse_slots(state.bias, state.stride, state.batch_size)?;
        state.advance();
        Ok(batch)
    }

    /// `count` independent uniform draws (duplicates allowed) from the index
    /// range `[lo, hi)`.
    pub fn sample_uniform<R: Rng + ?Sized>(
        &self,
        lo: usize,
        hi: usize,
        count: usize,
        rng: &mut R,
    ) -> Result<Vec<&T>, SampleError> {
        if lo >= hi {
            return Err(SampleError::EmptyRange { lo, hi });
        }
        if hi > self.items.len() {
            return Err(SampleError::InsufficientMemory { required: hi, len: self.items.len() });
        }
        Ok((0..count).map(|_| &self.items[rng.random_range(lo..hi)]).collect())
    }

    /// Mixed mini-batch: the first `ceil(batch / 2)` slots come from the
    /// reverse cursor, the remaining `floor(batch / 2)` are drawn uniformly
    /// from the tail `[(ceil(batch / 2) + 1) * stride, len)` — indices the
    /// cursor can never reach, now or later, since items only age upward.
    /// The cursor advances exactly once per successful call.
    pub fn sample_mixed<R: Rng + ?Sized>(
        &self,
        state: &mut ReverseSamplerState,
        rng: &mut R,
    ) -> Result<Vec<&T>, SampleError> {
        let required = (state.batch_size + 1) * state.stride + 1;
        if self.items.len() < required {
            return Err(SampleError::InsufficientMemory { required, len: self.items.len() });
        }
        let reverse_count = state.batch_size.div_ceil(2);
        let uniform_count = state.batch_size - reverse_count;
        let mut batch = self.reverse_slots(state.bias, state.stride, reverse_count)?;
        if uniform_count > 0 {
            let tail_lo = (reverse_count + 1) * state.stride;
            batch.extend(self.sample_uniform(tail_lo, self.items.len(), uniform_count, rng)?);
        }
        state.advance();
        Ok(batch)
    }

    fn reverse_slots(&self, bias: usize, stride: usize, count: usize) -> Result<Vec<&T>, SampleError> {
        debug_assert!(count >= 1);
        let required = bias + (count - 1) * stride + 1;
        if self.items.len() < required {
            return Err(SampleError::InsufficientMemory { required, len: self.items.len() });
        }
        Ok((0..count).map(|i| &self.items[bias + i * stride]).collect())
    }
}
