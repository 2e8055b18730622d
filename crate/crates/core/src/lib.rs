//! Simulation and inference engine for platform trials in which a treatment
//! arm joins after the trial has started, so that part of the shared control
//! group is non-concurrent.
//!
//! The crate is organised bottom-up:
//!
//! - [`design`]: trial structure, scenarios and the true response surface.
//! - [`randomization`]: permuted-block and simple assignment sequences.
//! - [`datagen`]: time-trend functions and trial dataset sampling.
//! - [`inference`]: step/linear time-adjusted regression models, the
//!   weighted-sum representation of the estimator and the one-sided test.
//! - [`montecarlo`]: scenario grids, replicate loops and summaries.
//! - [`config`]: the JSON configuration documents.

pub mod config;
pub mod datagen;
pub mod design;
mod error;
pub mod inference;
pub mod montecarlo;
pub mod randomization;
pub mod rng;

pub use error::{Error, Result};
