//! Reverse-order experience replay for Q-learning, plus the tabular and
//! neural machinery needed to study it on small control tasks.
//!
//! The central piece is [`replay`]: a capacity-bounded memory with push-front
//! insertion and a rotating bias/stride cursor that walks mini-batch slots
//! backward through time. [`tabular`] provides exact Q-learning and a
//! value-iteration oracle for measuring how backup order affects convergence,
//! [`nn`] is a minimal one-hidden-layer Q-network with hand-written
//! backpropagation and RMSprop, and [`agent`] ties everything into a DQN
//! training loop over the environments in [`envs`].
//!
//! The crate is `no_std` (alloc only); file formats, CSV output, and the CLI
//! live in the companion `rer-cli` crate.

#![no_std]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod agent;
pub mod envs;
pub mod nn;
pub mod replay;
pub mod seeding;
pub mod tabular;

pub use replay::{ReplayMemory, ReverseSamplerState, SampleError, Transition};
