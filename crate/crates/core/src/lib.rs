//! Dynamic simulation of grid-forming wind farms in the per-unit dq frame.
//!
//! The farm can be built at three aggregation levels: a single converter
//! carrying the full 420 MW rating, one converter per 60 MW string, or one
//! converter per 12 MW turbine. Every level shares the same control chain,
//! plant equations and fixed-step trapezoidal solver, so differences between
//! them come only from topology, dispatch and per-unit settings.
//!
//! Main entry points:
//!
//! - [`farm::FarmModel::build`] and [`farm::run`] for time-domain runs,
//! - [`scenario::ScenarioFile`] for the JSON scenario format,
//! - [`analysis`] for impedance scans, pole-slip detection and trace metrics,
//! - [`cli`] for the `run`, `scan` and `compare` commands.

#![allow(clippy::neg_cmp_op_on_partial_ord)] // `!(x > 0.0)` also rejects NaN

pub mod analysis;
pub mod cli;
pub mod control;
pub mod electrical;
pub mod error;
pub mod farm;
pub mod foundation;
pub mod plot;
pub mod scenario;

pub use error::{Error, Result};
