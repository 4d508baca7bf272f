//! Vanishing damping `α̃_N → 0` with `γ_N² = α_N²/(2α̃_N)`.
//!
//! With `α_N² = 2α̃_N γ²/log N` the Wick constant is
//! `σ_N ≈ γ_N² log N/(2π) → γ²/(2π)`, and `u_N` is compared with the undamped
//! limit `∂_t²w - Δw + (3γ²/2π)w + w³ = 0`. Any other noise rule is treated as
//! the `γ² = ∞` branch and run through the triviality pipeline with damping.

use std::f64::consts::SQRT_2;

use sdnlw_core::integrator::Regime;

use crate::config::{AlphaRuleSpec, StudySpec};
use crate::error::CliResult;
use crate::output::StudyReport;
use crate::studies::strong::run_split_study;
use crate::studies::weak::{run_limit_study, Limit};

/// `κ` whose cubic limit mass `(3/4π)κ²` equals `3γ²/(2π)`.
pub fn limit_kappa(gamma: f64) -> f64 {
    SQRT_2 * gamma
}

pub fn run_tuned_damping_study(spec: &StudySpec, workers: usize) -> CliResult<StudyReport> {
    match spec.alpha_rule {
        AlphaRuleSpec::TunedGamma { gamma } => {
            let limit = Limit { kappa: limit_kappa(gamma), damping: 0.0 };
            run_limit_study(spec, workers, Regime::TunedDamping, "tuned_damping", limit)
        }
        _ => run_split_study(spec, workers, Regime::Strong, "tuned_damping"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use sdnlw_core::integrator::limit_mass;

    #[test]
    fn limit_mass_matches_sigma_asymptotics() {
        let gamma: f64 = 1.3;
        assert_abs_diff_eq!(
            limit_mass(limit_kappa(gamma), 1),
            3.0 * gamma * gamma / (2.0 * std::f64::consts::PI),
            epsilon = 1e-14
        );
    }
}
