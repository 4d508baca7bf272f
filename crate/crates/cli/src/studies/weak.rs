//! Weak-noise limit: `u_N → w_κ` in `C([0,T]; H^{-ε})`.
//!
//! The limit `w` is computed once on the largest band of the study at half the
//! finest step. Each replica reports `sup_t ‖u_N(t) - w(t)‖_{H^{-ε}}` and
//! `sup_t ‖(v_N - w)(t)‖_{H^{1-ε} × H^{-ε}}` over the comparison times
//! `k·compare_dt`.

use sdnlw_core::integrator::{deterministic_path, dyadic_step, Regime, SimConfig, Simulation};
use sdnlw_core::sampler::{NoiseStream, Role};
use sdnlw_core::spectral::{sobolev_norm, PairState};
use sdnlw_core::Error;

use crate::config::{DampingRule, StudySpec};
use crate::error::{CliError, CliResult};
use crate::output::{q90_tail_check, summarize, Check, StudyReport, SummaryRow};
use crate::studies::{parallel_map, record, sim_config, trend_check};

pub const ERR_U: &str = "err_u";
pub const ERR_V: &str = "err_v";
pub const DISC_KAPPA: &str = "disc_err_w_kappa";
pub const DISC_ZERO: &str = "disc_err_w0";

/// The limit equation to compare against.
#[derive(Clone, Copy, Debug)]
pub(crate) struct Limit {
    /// Mass `(3/4π)κ²`.
    pub kappa: f64,
    pub damping: f64,
}

fn steps_between(dt: f64, h: f64) -> CliResult<usize> {
    let k = dt / h;
    if (k - k.round()).abs() > 1e-9 || k.round() < 1.0 {
        return Err(CliError::Config(format!("compare_dt {dt} is not a multiple of the step {h}")));
    }
    Ok(k.round() as usize)
}

/// `w` on `band` at the comparison times.
pub(crate) fn limit_path(spec: &StudySpec, limit: Limit, band: usize) -> CliResult<Vec<PairState>> {
    let mut cfg = SimConfig::new(band, Regime::Deterministic);
    cfg.kappa = limit.kappa;
    cfg.damping = limit.damping;
    cfg.t_final = spec.t_final;
    cfg.h = spec.h.unwrap_or_else(|| dyadic_step(band)) / 2.0;
    cfg.record_every = steps_between(spec.compare_dt, cfg.h)?;
    let initial = spec.initial().ok_or_else(|| CliError::Config("unknown initial data".into()))?;
    let (_, states) = deterministic_path(&cfg, &initial.state(band))?;
    Ok(states)
}

/// Per-replica `(err_u, err_v)` against each limit, or the blow-up time.
fn errors_against(
    cfg: &SimConfig,
    rc: sdnlw_core::renorm::RenormConstants,
    replica: u64,
    limits: &[&[PairState]],
    band: usize,
    eps: f64,
    every: usize,
) -> CliResult<Result<Vec<(f64, f64)>, f64>> {
    let mut sim = Simulation::new(cfg, rc, NoiseStream::new(cfg.seed, replica, Role::Wiener))?;
    let mut errs = vec![(0.0f64, 0.0f64); limits.len()];
    let compare = |sim: &Simulation, k: usize, errs: &mut Vec<(f64, f64)>| {
        let u = sim.u().pos.with_band(band);
        let v = sim.v().with_band(band);
        for (e, w) in errs.iter_mut().zip(limits) {
            let w = &w[k];
            e.0 = e.0.max(sobolev_norm(&(&u - &w.pos), -eps));
            e.1 = e.1.max(PairState::new(&v.pos - &w.pos, &v.vel - &w.vel).energy_norm(1.0 - eps));
        }
    };
    compare(&sim, 0, &mut errs);
    for step in 1..=cfg.steps() {
        match sim.step() {
            Ok(()) => {}
            Err(Error::BlowUp { time }) => return Ok(Err(time)),
            Err(e) => return Err(e.into()),
        }
        if step % every == 0 {
            compare(&sim, step / every, &mut errs);
        }
    }
    Ok(Ok(errs))
}

/// Runs the limit study for `regime` against the limit equation `limit`.
pub(crate) fn run_limit_study(
    spec: &StudySpec,
    workers: usize,
    regime: Regime,
    study: &str,
    limit: Limit,
) -> CliResult<StudyReport> {
    let mut report = StudyReport::new(spec, study);
    let eps = spec.epsilon;
    let band = *spec.n_ladder.last().expect("validated ladder is not empty");
    let w = limit_path(spec, limit, band)?;

    for &n in &spec.n_ladder {
        let cfg = sim_config(spec, n, regime)?;
        let rc = cfg.renorm_constants()?;
        let every = steps_between(spec.compare_dt, cfg.h)?;
        let runs = parallel_map(workers, spec.mc_replicas, |r| {
            errors_against(&cfg, rc, r, &[&w], band, eps, every)
        })?;
        let (mut eu, mut ev, mut blowups) = (Vec::new(), Vec::new(), 0);
        for (r, run) in runs.into_iter().enumerate() {
            let r = r as u64;
            match run? {
                Err(t) => {
                    blowups += 1;
                    report.records.push(record(study, &cfg, &rc, r, t, "blowup", f64::NAN, true));
                }
                Ok(errs) => {
                    let (a, b) = errs[0];
                    eu.push(a);
                    ev.push(b);
                    report.records.push(record(study, &cfg, &rc, r, cfg.t_final, ERR_U, a, false));
                    report.records.push(record(study, &cfg, &rc, r, cfg.t_final, ERR_V, b, false));
                }
            }
        }
        for (name, col) in [(ERR_U, &eu), (ERR_V, &ev)] {
            if let Some(s) = summarize(col, blowups) {
                report.summary.push(SummaryRow::new(n, name, rc.lambda, &s));
            }
        }
        if blowups as f64 > spec.blowup_budget * spec.mc_replicas as f64 {
            report.blowup_exceeded.push(n);
        }
    }

    if spec.n_ladder.len() >= 2 {
        report.checks.push(q90_tail_check("err_u_q90_decreasing", &report, ERR_U));
        let q = report.ladder_values(ERR_V, |r| r.q90);
        report.checks.push(trend_check("err_v_q90_decreasing", "q90", &q, false));
    } else {
        report.checks.push(Check::informative("err_u_q90_decreasing", true, "single ladder entry".into()));
    }
    Ok(report)
}

/// Errors of `u_N` to `w_κ` and to the massless `w_0` on the same runs.
fn run_discrimination(spec: &StudySpec, workers: usize, report: &mut StudyReport) -> CliResult<()> {
    let Some(d) = spec.discrimination.clone() else {
        return Ok(());
    };
    let study = "weak_limit_discrimination";
    let mut local = spec.clone();
    local.kappa = d.kappa;
    local.mc_replicas = d.replicas;
    local.n_ladder = vec![d.n];
    let damping = spec.damping.damping(d.n);
    let w_kappa = limit_path(&local, Limit { kappa: d.kappa / damping.sqrt(), damping }, d.n)?;
    let w_zero = limit_path(&local, Limit { kappa: 0.0, damping }, d.n)?;
    let cfg = sim_config(&local, d.n, Regime::Weak)?;
    let rc = cfg.renorm_constants()?;
    let every = steps_between(spec.compare_dt, cfg.h)?;
    let runs = parallel_map(workers, d.replicas, |r| {
        errors_against(&cfg, rc, r, &[&w_kappa, &w_zero], d.n, spec.epsilon, every)
    })?;
    let (mut ek, mut e0, mut blowups) = (Vec::new(), Vec::new(), 0);
    for (r, run) in runs.into_iter().enumerate() {
        let r = r as u64;
        match run? {
            Err(t) => {
                blowups += 1;
                report.records.push(record(study, &cfg, &rc, r, t, "blowup", f64::NAN, true));
            }
            Ok(errs) => {
                ek.push(errs[0].0);
                e0.push(errs[1].0);
                report.records.push(record(study, &cfg, &rc, r, cfg.t_final, DISC_KAPPA, errs[0].0, false));
                report.records.push(record(study, &cfg, &rc, r, cfg.t_final, DISC_ZERO, errs[1].0, false));
            }
        }
    }
    let (sk, s0) = match (summarize(&ek, blowups), summarize(&e0, blowups)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            report.blowup_exceeded.push(d.n);
            return Ok(());
        }
    };
    report.checks.push(Check::required(
        "mass_term_discrimination",
        sk.median < s0.median,
        format!(
            "kappa = {}, N = {}: median error to w_kappa {} vs to w_0 {}",
            d.kappa, d.n, sk.median, s0.median
        ),
    ));
    report.summary.push(SummaryRow::new(d.n, DISC_KAPPA, rc.lambda, &sk));
    report.summary.push(SummaryRow::new(d.n, DISC_ZERO, rc.lambda, &s0));
    if blowups as f64 > spec.blowup_budget * d.replicas as f64 {
        report.blowup_exceeded.push(d.n);
    }
    Ok(())
}

pub fn run_weak_study(spec: &StudySpec, workers: usize) -> CliResult<StudyReport> {
    let DampingRule::Constant { value: damping } = spec.damping else {
        return Err(CliError::Config("the weak study needs a constant damping".into()));
    };
    // With damping γ the Wick constant is σ_N ≈ 3κ²/(4πγ)·(1/3), so the limit
    // mass is that of κ/sqrt(γ).
    let limit = Limit { kappa: spec.kappa / damping.sqrt(), damping };
    let mut report = run_limit_study(spec, workers, Regime::Weak, "weak_limit", limit)?;
    run_discrimination(spec, workers, &mut report)?;
    Ok(report)
}
