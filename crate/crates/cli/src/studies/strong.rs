//! Strong-noise triviality: `u_N → 0` in `H^{-ε}([0,T]; H^{-ε})`.
//!
//! Each replica reports the total norm `‖χ_T u_N‖_{H^{-ε}_t H^{-ε}_x}` and the
//! three pieces of the split `u_N = z_N + v_N^lin + V_N`:
//! `‖z_N‖_{C_T H^{-ε}}`, `‖χ_T v_N^lin‖_{H^{-ε}_t H^{1-ε}_x}` (deterministic,
//! one value per `N`) and `‖V_N‖_{C_T H^{1-ε}}`.

use sdnlw_core::diagnostics::{spacetime_norm, vlin_trajectory, SpaceTimeSample};
use sdnlw_core::integrator::{Regime, Simulation};
use sdnlw_core::linear_flow::evolve_homogeneous;
use sdnlw_core::sampler::{NoiseStream, Role};
use sdnlw_core::spectral::sobolev_norm;
use sdnlw_core::Error;

use crate::config::StudySpec;
use crate::error::CliResult;
use crate::output::{q90_tail_check, summarize, Check, StudyReport, SummaryRow};
use crate::studies::{parallel_map, record, sim_config, trend_check};

/// Band of every initial datum in the library.
const DATA_BAND: usize = 6;

pub const TOTAL: &str = "total";
pub const Z_SUP: &str = "z_sup";
pub const VLIN: &str = "vlin";
pub const V_REST: &str = "v_rest";

struct Replica {
    blowup: Option<f64>,
    total: f64,
    z_sup: f64,
    v_rest: f64,
}

/// Runs the split study in `regime` (strong, or strong with damping).
pub(crate) fn run_split_study(spec: &StudySpec, workers: usize, regime: Regime, study: &str) -> CliResult<StudyReport> {
    let mut report = StudyReport::new(spec, study);
    let eps = spec.epsilon;
    for &n in &spec.n_ladder {
        let cfg = sim_config(spec, n, regime)?;
        let rc = cfg.renorm_constants()?;
        let data = cfg.initial.state(n.min(DATA_BAND));
        let vlin = spacetime_norm(&vlin_trajectory(&data, &rc, cfg.t_final, cfg.h)?, -eps, 1.0 - eps)?;

        let replicas = parallel_map(workers, spec.mc_replicas, |r| -> CliResult<Replica> {
            let mut sim = Simulation::new(&cfg, rc, NoiseStream::new(cfg.seed, r, Role::Wiener))?;
            let syms = sim.symbols().clone();
            let mut snapshots = vec![sim.u().pos];
            let mut z_sup = sobolev_norm(&sim.z().pos, -eps);
            let mut v_rest = 0.0f64;
            for _ in 0..cfg.steps() {
                match sim.step() {
                    Ok(()) => {}
                    Err(Error::BlowUp { time }) => {
                        return Ok(Replica { blowup: Some(time), total: f64::NAN, z_sup: f64::NAN, v_rest: f64::NAN })
                    }
                    Err(e) => return Err(e.into()),
                }
                let lin = evolve_homogeneous(&data, &syms, sim.time()).pos.with_band(n);
                v_rest = v_rest.max(sobolev_norm(&(&sim.v().pos - &lin), 1.0 - eps));
                z_sup = z_sup.max(sobolev_norm(&sim.z().pos, -eps));
                snapshots.push(sim.u().pos);
            }
            let sample = SpaceTimeSample::from_trajectory(n, cfg.t_final, cfg.h, &snapshots)?;
            let total = spacetime_norm(&sample, -eps, -eps)?;
            Ok(Replica { blowup: None, total, z_sup, v_rest })
        })?
        .into_iter()
        .collect::<CliResult<Vec<_>>>()?;

        let mut cols: [Vec<f64>; 3] = Default::default();
        let mut blowups = 0;
        for (r, rep) in replicas.iter().enumerate() {
            let r = r as u64;
            if let Some(t) = rep.blowup {
                blowups += 1;
                report.records.push(record(study, &cfg, &rc, r, t, "blowup", f64::NAN, true));
                continue;
            }
            for (col, (name, v)) in cols.iter_mut().zip([(TOTAL, rep.total), (Z_SUP, rep.z_sup), (V_REST, rep.v_rest)]) {
                col.push(v);
                report.records.push(record(study, &cfg, &rc, r, cfg.t_final, name, v, false));
            }
            report.records.push(record(study, &cfg, &rc, r, cfg.t_final, VLIN, vlin, false));
        }
        for (name, col) in [(TOTAL, &cols[0]), (Z_SUP, &cols[1]), (V_REST, &cols[2])] {
            if let Some(s) = summarize(col, blowups) {
                report.summary.push(SummaryRow::new(n, name, rc.lambda, &s));
            }
        }
        if let Some(s) = summarize(&[vlin], 0) {
            report.summary.push(SummaryRow::new(n, VLIN, rc.lambda, &s));
        }
        if blowups as f64 > spec.blowup_budget * spec.mc_replicas as f64 {
            report.blowup_exceeded.push(n);
        }
    }

    if spec.n_ladder.len() >= 2 {
        report.checks.push(q90_tail_check("total_q90_decreasing", &report, TOTAL));
        for name in [Z_SUP, VLIN, V_REST] {
            let medians = report.ladder_values(name, |r| r.median);
            report.checks.push(trend_check(&format!("{name}_median_decreasing"), "medians", &medians, false));
        }
    } else {
        report.checks.push(Check::informative("total_q90_decreasing", true, "single ladder entry".into()));
    }
    Ok(report)
}

pub fn run_strong_study(spec: &StudySpec, workers: usize) -> CliResult<StudyReport> {
    run_split_study(spec, workers, Regime::Strong, "strong_triviality")
}
