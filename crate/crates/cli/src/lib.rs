//! Study runners for the truncated stochastic damped cubic wave equation.
//!
//! A study is described by a [`config::StudySpec`] (read from TOML), run over
//! a ladder of truncations with [`studies::run_study`], and written as CSV and
//! JSON by [`output::StudyReport::write`]. [`plotdata::emit_plotdata`] turns
//! study directories into per-figure tables and a manifest.
//!
//! Convergence in probability is tested as a surrogate: the 90th percentile
//! of the relevant norm over replicas must strictly decrease over the last
//! three ladder entries. This is a finite-sample trend check, not a proof of
//! the limit.

pub mod config;
pub mod error;
pub mod output;
pub mod plotdata;
pub mod studies;

pub use error::{CliError, CliResult};
