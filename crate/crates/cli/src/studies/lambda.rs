//! Asymptotics of the renormalized mass `λ_N` against `(3/4π)α² log N`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sdnlw_core::renorm::{asymptotic_reference, lambda_residual, solve_lambda};

use crate::config::StudySpec;
use crate::error::CliResult;
use crate::output::{write_csv, Check, StudyReport, SummaryRow};

/// One row of `lambda.csv`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LambdaRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub alpha: f64,
    pub lambda: f64,
    pub reference: f64,
    /// `λ_N - (3/4π)α² log N`.
    pub residual: f64,
    #[serde(rename = "residual_over_loglogN")]
    pub residual_over_loglog_n: f64,
    /// Residual of the fixed-point equation at the computed root.
    pub root_residual: f64,
    /// `λ_N / ((3/4π)α² log N)`.
    pub ratio: f64,
}

/// Smallest `N` whose `log log N` is at least 1 and so enters the fit.
pub const FIT_MIN_N: usize = 16;

pub fn lambda_rows(spec: &StudySpec) -> CliResult<Vec<LambdaRow>> {
    let rule = spec.alpha_rule();
    spec.n_ladder
        .iter()
        .map(|&n| {
            let alpha = rule.alpha(n, spec.kappa, 1.0)?;
            let lambda = solve_lambda(alpha, n)?;
            let reference = asymptotic_reference(alpha, n);
            let residual = lambda - reference;
            Ok(LambdaRow {
                n,
                alpha,
                lambda,
                reference,
                residual,
                residual_over_loglog_n: residual / (n as f64).ln().ln(),
                root_residual: lambda_residual(alpha, n, lambda)?,
                ratio: lambda / reference,
            })
        })
        .collect()
}

/// Least-squares constant `C` of `|residual| ≈ C log log N` through the
/// origin over the entries with `N ≥ 16`, and whether every such entry obeys
/// `|residual| ≤ 2C log log N`.
pub fn envelope_fit(rows: &[LambdaRow]) -> Option<(f64, bool)> {
    let fit: Vec<(f64, f64)> = rows
        .iter()
        .filter(|r| r.n >= FIT_MIN_N)
        .map(|r| ((r.n as f64).ln().ln(), r.residual.abs()))
        .collect();
    if fit.is_empty() {
        return None;
    }
    let c = fit.iter().map(|(l, r)| l * r).sum::<f64>() / fit.iter().map(|(l, _)| l * l).sum::<f64>();
    Some((c, fit.iter().all(|(l, r)| *r <= 2.0 * c * l)))
}

pub fn run_lambda_study(spec: &StudySpec) -> CliResult<StudyReport> {
    let rows = lambda_rows(spec)?;
    let mut report = StudyReport::new(spec, "lambda_asymptotics");
    report.replicas = 0;
    for r in &rows {
        let s = sdnlw_core::diagnostics::McSummary::from_values(&[r.lambda], 0)?;
        report.summary.push(SummaryRow::new(r.n, "lambda", r.lambda, &s));
    }
    if rows.len() >= 2 {
        match envelope_fit(&rows) {
            Some((c, ok)) => report.checks.push(Check::required(
                "residual_within_twice_fitted_loglog",
                ok,
                format!(
                    "C = {c}; residual/loglogN = {:?}",
                    rows.iter().map(|r| r.residual_over_loglog_n).collect::<Vec<_>>()
                ),
            )),
            None => report.checks.push(Check::informative(
                "residual_within_twice_fitted_loglog",
                true,
                "no ladder entry with N >= 16; nothing to fit".into(),
            )),
        }
    }
    let worst = rows.iter().map(|r| r.root_residual.abs()).fold(0.0, f64::max);
    report.checks.push(Check::informative(
        "root_residual_below_1e-12",
        worst <= 1e-12,
        format!("max |root residual| = {worst:e}"),
    ));
    Ok(report)
}

pub fn write_lambda_csv(spec: &StudySpec, dir: &Path) -> CliResult<()> {
    write_csv(&dir.join("lambda.csv"), &lambda_rows(spec)?)
}
