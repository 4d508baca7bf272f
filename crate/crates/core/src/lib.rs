//! Numerical kernels for the truncated stochastic damped cubic wave equation
//!
//! ```text
//! ∂_t²u - Δu + ∂_t u + u³ = α ξ   on (R/2πZ)²,
//! ```
//!
//! with the noise `ξ` projected onto the Fourier ball `|n| ≤ N`.
//!
//! Solutions are split as `u = z + v`, where `z` is the stationary solution of
//! the linear equation with mass `λ` (sampled exactly, mode by mode) and `v`
//! solves the residual equation with the Wick-ordered nonlinearity, advanced by
//! a second-order exponential integrator. The modules follow that pipeline:
//!
//! - [`spectral`]: fields, transforms, dealiased products and Sobolev norms.
//! - [`renorm`]: `λ_N`, `σ_N`, Hermite polynomials and Wick coefficients.
//! - [`sampler`]: reproducible Gaussian initial data and noise.
//! - [`linear_flow`]: the damped wave propagator and the exact linear step.
//! - [`integrator`]: the residual equation, the deterministic limit, energy.
//! - [`diagnostics`]: space-time norms, Wick-power decay, Monte-Carlo summaries.

pub mod diagnostics;
pub mod error;
pub mod integrator;
pub mod linear_flow;
pub mod renorm;
pub mod sampler;
pub mod spectral;

pub use error::{Error, Result};
