//! Simulation of simple fractional Brownian motion (a discrete-scale-invariant
//! process) and estimation of its scale parameter and Hurst indices.
//!
//! The estimation chain runs `stats` → `changepoint` (initial scale) →
//! `scale` (refined scale, exponent gap, rescaling) → `hurst`; `pipeline`
//! strings the stages together.

// `!(x > 0.0)` style checks are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod bench;
pub mod changepoint;
pub mod commands;
pub mod config;
pub mod error;
pub mod hurst;
pub mod io;
pub mod numeric;
pub mod pipeline;
pub mod scale;
pub mod series;
pub mod sim;
pub mod stats;

pub use error::{Error, Result};
pub use series::{SamplingGrid, TimeSeries};
