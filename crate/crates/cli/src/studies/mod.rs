//! Study runners. Replicas run on a rayon pool; results are collected in
//! replica order, so output files do not depend on scheduling.

use std::path::Path;

use rayon::prelude::*;

use sdnlw_core::integrator::{Regime, SimConfig};
use sdnlw_core::renorm::RenormConstants;

use crate::config::{StudyKind, StudySpec};
use crate::error::{CliError, CliResult};
use crate::output::{Check, StudyRecord, StudyReport};

pub mod lambda;
pub mod strong;
pub mod tuned;
pub mod weak;
pub mod wick;

/// Runs `f(0..count)` on `workers` threads and returns results in order.
pub(crate) fn parallel_map<T: Send>(
    workers: usize,
    count: usize,
    f: impl Fn(u64) -> T + Sync + Send,
) -> CliResult<Vec<T>> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| CliError::Config(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| (0..count as u64).into_par_iter().map(&f).collect()))
}

/// Simulation settings of one ladder entry.
pub(crate) fn sim_config(spec: &StudySpec, n: usize, regime: Regime) -> CliResult<SimConfig> {
    let mut cfg = SimConfig::new(n, regime);
    cfg.alpha_rule = spec.alpha_rule();
    cfg.kappa = spec.kappa;
    cfg.t_final = spec.t_final;
    cfg.h = spec.step(n);
    cfg.seed = spec.seed;
    cfg.mc_replicas = spec.mc_replicas;
    cfg.damping = spec.damping.damping(n);
    cfg.noise_dt = Some(spec.noise_dt());
    cfg.epsilon = spec.epsilon;
    cfg.initial = spec
        .initial()
        .ok_or_else(|| CliError::Config(format!("unknown initial_data '{}'", spec.initial_data)))?;
    cfg.validate()?;
    Ok(cfg)
}

/// A record row carrying the parameters of `cfg` and `rc`.
pub(crate) fn record(
    study: &str,
    cfg: &SimConfig,
    rc: &RenormConstants,
    replica: u64,
    time: f64,
    diagnostic: &str,
    value: f64,
    blowup: bool,
) -> StudyRecord {
    StudyRecord {
        study: study.to_string(),
        n: cfg.n,
        seed: cfg.seed,
        replica,
        time,
        diagnostic: diagnostic.to_string(),
        value,
        blowup,
        alpha: rc.alpha,
        lambda: rc.lambda,
        sigma: rc.sigma,
        damping: rc.damping,
        kappa: cfg.kappa,
        h: cfg.h,
        epsilon: cfg.epsilon,
    }
}

/// Strict decrease of `values` as an informative check.
pub(crate) fn trend_check(name: &str, label: &str, values: &[f64], required: bool) -> Check {
    let passed = values.len() >= 2 && sdnlw_core::diagnostics::strictly_decreasing(values);
    let detail = format!("{label}: {values:?}");
    if required {
        Check::required(name, passed, detail)
    } else {
        Check::informative(name, passed, detail)
    }
}

/// Runs the study named by `spec`.
pub fn run_study(spec: &StudySpec, workers: usize) -> CliResult<StudyReport> {
    spec.validate()?;
    match spec.kind()? {
        StudyKind::LambdaAsymptotics => lambda::run_lambda_study(spec),
        StudyKind::WickDecay => wick::run_wick_study(spec, workers),
        StudyKind::StrongTriviality => strong::run_strong_study(spec, workers),
        StudyKind::WeakLimit => weak::run_weak_study(spec, workers),
        StudyKind::TunedDamping => tuned::run_tuned_damping_study(spec, workers),
    }
}

/// Runs the study and writes its files into `out`.
pub fn run_and_write(spec: &StudySpec, workers: usize, out: &Path) -> CliResult<StudyReport> {
    let report = run_study(spec, workers)?;
    report.write(spec, out)?;
    if spec.kind()? == StudyKind::LambdaAsymptotics {
        lambda::write_lambda_csv(spec, out)?;
    }
    Ok(report)
}
