//! Cadlag path algebra and limit experiments for processes with random time
//! substitution.
//!
//! Everything here is `no_std` with `alloc`. Paths are piecewise linear with
//! jumps ([`PiecewisePath`]), which is closed under composition with monotone
//! piecewise-linear time changes. On top of that the crate computes the
//! Skorokhod J1 distance exactly up to a certified bisection gap, samples the
//! processes of the insurance loss model from counter-addressed ChaCha
//! streams, and runs Monte Carlo convergence experiments.
//!
//! File formats and the command-line front end live in the `timesub` crate.
#![cfg_attr(not(test), no_std)]
// `!(x > 0.0)` deliberately rejects NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

extern crate alloc;

pub mod convergence;
pub mod counterexamples;
mod error;
pub mod metric;
pub mod paths;
pub mod processes;
pub mod rng;

pub use error::{Error, Result};
pub use metric::{skorokhod_distance, DistanceResult};
pub use paths::{compose, Jump, PiecewisePath, Reparametrization, TimeChange, TimeChangeClass};
pub use rng::{Role, Seed};
