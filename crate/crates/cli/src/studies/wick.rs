//! Decay of the Wick powers `:z_N^ℓ:` in `L²_T W^{-ε,∞}` and of `z_N` in
//! `C_T H^{-ε}` along a ladder of truncations.

use sdnlw_core::diagnostics::{log_log_slope, strictly_decreasing, wick_curve_point, wick_replica, WickConfig};
use sdnlw_core::integrator::Regime;

use crate::config::StudySpec;
use crate::error::CliResult;
use crate::output::{Check, StudyReport, SummaryRow};
use crate::studies::{parallel_map, record, sim_config, trend_check};

pub const WICK: [&str; 3] = ["wick1", "wick2", "wick3"];
pub const Z_SUP: &str = "z_sup";

pub fn run_wick_study(spec: &StudySpec, workers: usize) -> CliResult<StudyReport> {
    let study = "wick_decay";
    let mut report = StudyReport::new(spec, study);
    let wcfg = WickConfig {
        t_final: spec.t_final,
        time_points: spec.wick.time_points,
        epsilon: spec.epsilon,
        oversample: spec.wick.oversample,
        seed: spec.seed,
    };
    let mut lambdas = Vec::new();
    for &n in &spec.n_ladder {
        let cfg = sim_config(spec, n, Regime::Strong)?;
        let rc = cfg.renorm_constants()?;
        lambdas.push(rc.lambda);
        let reps = parallel_map(workers, spec.mc_replicas, |r| wick_replica(&rc, &wcfg, r))?
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        for (r, rep) in reps.iter().enumerate() {
            for (name, v) in WICK.iter().zip(rep.wick) {
                report.records.push(record(study, &cfg, &rc, r as u64, cfg.t_final, name, v, false));
            }
            report.records.push(record(study, &cfg, &rc, r as u64, cfg.t_final, Z_SUP, rep.z_sup, false));
        }
        let point = wick_curve_point(&rc, &reps)?;
        for (name, s) in WICK.iter().zip(&point.wick) {
            report.summary.push(SummaryRow::new(n, name, rc.lambda, s));
        }
        report.summary.push(SummaryRow::new(n, Z_SUP, rc.lambda, &point.z_sup));
    }

    if spec.n_ladder.len() >= 2 {
        let guide = -spec.epsilon / 4.0;
        for name in WICK {
            let means = report.ladder_values(name, |r| r.mean);
            let slope = log_log_slope(&lambdas, &means);
            let ratio = slope / guide;
            report.checks.push(Check::required(
                &format!("{name}_mean_decreasing"),
                strictly_decreasing(&means),
                format!("means: {means:?}"),
            ));
            report.checks.push(Check::required(
                &format!("{name}_slope_within_factor_2"),
                (0.5..=2.0).contains(&ratio),
                format!("slope in log lambda = {slope}, guide = {guide}, ratio = {ratio}"),
            ));
        }
        let means = report.ladder_values(Z_SUP, |r| r.mean);
        report.checks.push(trend_check("z_sup_mean_decreasing", "means", &means, false));
    }
    Ok(report)
}
