//! Experiment harness for the reverse-experience-replay lab: config files,
//! training orchestration, CSV metrics, SVG plots, checkpoints, and the
//! tabular convergence reports. The algorithms themselves live in
//! `rer-core`; this crate owns everything that touches the filesystem.

pub mod checkpoint;
pub mod config;
pub mod manifest;
pub mod metrics;
pub mod oracle;
pub mod plot;
pub mod runner;
