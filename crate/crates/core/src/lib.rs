//! Multicell downlink scheduling simulator.
//!
//! Draws users of a cell surrounded by a ring of interfering base stations,
//! applies channel-aware schedulers (max-SINR, max-Gain and interference-free
//! bounds), compares them with a three-cell zero-forcing joint-processing
//! baseline, and checks the Monte Carlo curves against closed-form
//! extreme-value asymptotics.

pub mod asymptotics;
pub mod channel_model;
pub mod cli;
pub mod error;
pub mod joint_processing;
pub mod montecarlo;
pub mod scheduling;
pub mod validation;

pub use error::{Error, Result};
