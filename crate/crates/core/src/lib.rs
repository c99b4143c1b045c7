//! Simulation and closed-form analysis of stochastic quantum Zeno dynamics.
//!
//! A small quantum system is measured projectively onto its initial state at
//! fixed intervals while a classical random field drives it. The survival
//! probability after `m` measurements is a product of single-interval factors
//! `q(Ω)`, so it becomes a random variable whose time and ensemble averages
//! depend on how strongly the field is correlated in time.
//!
//! * [`noise`] samples correlated field trajectories (discrete hold and
//!   continuous random telegraph).
//! * [`quantum`] computes single-interval survival probabilities from the
//!   system Hamiltonian.
//! * [`estimators`] turns realizations into time averages and mergeable
//!   ensemble statistics.
//! * [`analytic`] evaluates the annealed, finite-temperature and quenched
//!   closed forms plus the Zeno-regime expansions.
//! * [`engine`] runs whole experiments from a config file and writes CSV
//!   curves and a JSON manifest.

// `!(x > 0.0)` style checks are meant to reject NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod engine;
mod error;
pub mod estimators;
pub mod noise;
pub mod quantum;

pub use error::{Error, Result};

/// Frequencies in the CLI and config files are given in MHz and scaled by
/// this factor to angular frequency in rad/s.
pub const TWO_PI_MHZ: f64 = 2.0 * std::f64::consts::PI * 1.0e6;

/// Nanoseconds to seconds.
pub const NS: f64 = 1.0e-9;
