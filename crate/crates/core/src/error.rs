//! Error type shared by the numerical kernels.

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum Error {
    #[error("grid of size {m} cannot represent band limit {band} (need at least {need})")]
    GridTooSmall { m: usize, band: usize, need: usize },
    #[error("mode sum requires lambda > 0, got {0}")]
    NonPositiveLambda(f64),
    #[error("bisection did not converge after {0} iterations")]
    NoConvergence(usize),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("cutoff window is not identically one on [0, T]")]
    WindowNotUnit,
    #[error("solution blew up at t = {time}")]
    BlowUp { time: f64 },
    #[error("no records to aggregate")]
    Empty,
}

pub type Result<T> = std::result::Result<T, Error>;
