//! Capacity and energy-efficiency analysis of multi-radio multi-channel
//! wireless networks.
//!
//! The pipeline: [`model::enumerate_tuples`] lists every (link, radio pair,
//! channel) point, [`conflict::build_mdcg`] marks which of them cannot be
//! active together, [`lp::solve_two_stage`] finds the capacity and then the
//! least-energy schedule at that capacity, and [`energy::energy_efficiency`]
//! scores the schedule. [`sweep`] repeats this over channel/radio grids.

pub mod conflict;
pub mod energy;
pub mod error;
pub mod lp;
pub mod model;
pub mod sweep;

pub use error::{Error, Result};
