//! Figure tables and the manifest read by the plotting component.
//!
//! `emit_plotdata` scans an input directory (and its immediate
//! subdirectories) for study outputs and writes one tidy CSV per figure:
//!
//! | file                  | source study         | columns |
//! |-----------------------|----------------------|---------|
//! | `lambda_vs_logN.csv`  | `lambda_asymptotics` | `N, logN, alpha, lambda, reference` |
//! | `wick_decay.csv`      | `wick_decay`         | `N, lambda, quantity, mean, std_err, guide` |
//! | `strong_split.csv`    | `strong_triviality`  | `N, z_sup, vlin, v_rest, total` |
//! | `weak_error.csv`      | `weak_limit`         | `N, kappa, target, median, q90, mean, std_err` |
//!
//! `manifest.json` lists the figures that could be produced; it follows
//! `schema/manifest.schema.json`.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::CliResult;
use crate::output::{read_csv, write_csv, StudyReport, SummaryRow};
use crate::studies::lambda::LambdaRow;
use crate::studies::{strong, weak, wick};

pub const MANIFEST_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub column: String,
    pub label: String,
    /// `linear` or `log`.
    pub scale: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Figure {
    pub id: String,
    pub csv: String,
    pub source_study: String,
    pub x: Axis,
    pub y: Vec<Axis>,
    /// Column whose distinct values are drawn as separate curves.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group_by: Option<String>,
    /// Reference curve drawn for comparison.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<String>,
    /// `decreasing`, `increasing` or `none`, along `x`.
    pub expected_monotonicity: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: u32,
    pub figures: Vec<Figure>,
}

#[derive(Serialize)]
struct LambdaPlotRow {
    #[serde(rename = "N")]
    n: usize,
    #[serde(rename = "logN")]
    log_n: f64,
    alpha: f64,
    lambda: f64,
    reference: f64,
}

#[derive(Serialize)]
struct WickPlotRow {
    #[serde(rename = "N")]
    n: usize,
    lambda: f64,
    quantity: String,
    mean: f64,
    std_err: f64,
    /// `λ_N^{-ε/4}` scaled to the mean at the first ladder entry.
    guide: f64,
}

#[derive(Serialize)]
struct StrongPlotRow {
    #[serde(rename = "N")]
    n: usize,
    z_sup: f64,
    vlin: f64,
    v_rest: f64,
    total: f64,
}

#[derive(Serialize)]
struct WeakPlotRow {
    #[serde(rename = "N")]
    n: usize,
    kappa: f64,
    target: String,
    median: f64,
    q90: f64,
    mean: f64,
    std_err: f64,
}

fn axis(column: &str, label: &str, scale: &str) -> Axis {
    Axis { column: column.into(), label: label.into(), scale: scale.into() }
}

/// Study directories under `input`, sorted by path.
fn study_dirs(input: &Path) -> CliResult<Vec<(PathBuf, StudyReport)>> {
    let mut dirs = vec![input.to_path_buf()];
    let mut subs: Vec<PathBuf> = fs::read_dir(input)?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_dir())
        .collect();
    subs.sort();
    dirs.extend(subs);
    let mut out = Vec::new();
    for dir in dirs {
        let path = dir.join("study.json");
        if path.is_file() {
            let report: StudyReport = serde_json::from_str(&fs::read_to_string(&path)?)?;
            out.push((dir, report));
        }
    }
    Ok(out)
}

fn lookup<'a>(rows: &'a [SummaryRow], n: usize, quantity: &str) -> Option<&'a SummaryRow> {
    rows.iter().find(|r| r.n == n && r.quantity == quantity)
}

/// Writes the figure tables and `manifest.json` into `output`.
pub fn emit_plotdata(input: &Path, output: &Path) -> CliResult<Manifest> {
    fs::create_dir_all(output)?;
    let mut figures = Vec::new();
    for (dir, report) in study_dirs(input)? {
        match report.study.as_str() {
            "lambda_asymptotics" => {
                let rows: Vec<LambdaRow> = read_csv(&dir.join("lambda.csv"))?;
                let plot: Vec<LambdaPlotRow> = rows
                    .iter()
                    .map(|r| LambdaPlotRow {
                        n: r.n,
                        log_n: (r.n as f64).ln(),
                        alpha: r.alpha,
                        lambda: r.lambda,
                        reference: r.reference,
                    })
                    .collect();
                write_csv(&output.join("lambda_vs_logN.csv"), &plot)?;
                figures.push(Figure {
                    id: "lambda_vs_logN".into(),
                    csv: "lambda_vs_logN.csv".into(),
                    source_study: report.study.clone(),
                    x: axis("logN", "log N", "linear"),
                    y: vec![axis("lambda", "lambda_N", "linear")],
                    group_by: None,
                    reference: Some("reference".into()),
                    expected_monotonicity: "increasing".into(),
                });
            }
            "wick_decay" => {
                let rows: Vec<SummaryRow> = read_csv(&dir.join("summary.csv"))?;
                let mut plot = Vec::new();
                for q in wick::WICK.iter().chain([&wick::Z_SUP]) {
                    let series: Vec<&SummaryRow> = report.n_ladder.iter().filter_map(|n| lookup(&rows, *n, q)).collect();
                    let Some(first) = series.first() else { continue };
                    let scale = first.mean * first.lambda.powf(report.epsilon / 4.0);
                    for r in series.iter() {
                        plot.push(WickPlotRow {
                            n: r.n,
                            lambda: r.lambda,
                            quantity: q.to_string(),
                            mean: r.mean,
                            std_err: r.std_err,
                            guide: scale * r.lambda.powf(-report.epsilon / 4.0),
                        });
                    }
                }
                write_csv(&output.join("wick_decay.csv"), &plot)?;
                figures.push(Figure {
                    id: "wick_decay".into(),
                    csv: "wick_decay.csv".into(),
                    source_study: report.study.clone(),
                    x: axis("N", "N", "log"),
                    y: vec![axis("mean", "E norm", "log")],
                    group_by: Some("quantity".into()),
                    reference: Some("guide".into()),
                    expected_monotonicity: "decreasing".into(),
                });
            }
            "strong_triviality" => {
                let rows: Vec<SummaryRow> = read_csv(&dir.join("summary.csv"))?;
                let plot: Vec<StrongPlotRow> = report
                    .n_ladder
                    .iter()
                    .filter_map(|&n| {
                        let m = |q: &str| lookup(&rows, n, q).map(|r| r.median);
                        Some(StrongPlotRow {
                            n,
                            z_sup: m(strong::Z_SUP)?,
                            vlin: m(strong::VLIN)?,
                            v_rest: m(strong::V_REST)?,
                            total: m(strong::TOTAL)?,
                        })
                    })
                    .collect();
                write_csv(&output.join("strong_split.csv"), &plot)?;
                figures.push(Figure {
                    id: "strong_split".into(),
                    csv: "strong_split.csv".into(),
                    source_study: report.study.clone(),
                    x: axis("N", "N", "log"),
                    y: vec![
                        axis("z_sup", "z_N in C_T H^-eps", "log"),
                        axis("vlin", "v_N^lin in H^-eps_t H^(1-eps)_x", "log"),
                        axis("v_rest", "V_N in C_T H^(1-eps)", "log"),
                        axis("total", "u_N in H^-eps_t H^-eps_x", "log"),
                    ],
                    group_by: None,
                    reference: None,
                    expected_monotonicity: "decreasing".into(),
                });
            }
            "weak_limit" => {
                let rows: Vec<SummaryRow> = read_csv(&dir.join("summary.csv"))?;
                let mut plot = Vec::new();
                for r in &rows {
                    let (target, kappa) = match r.quantity.as_str() {
                        weak::ERR_U => ("w_kappa", report.kappa),
                        weak::DISC_KAPPA => ("w_kappa_discrimination", f64::NAN),
                        weak::DISC_ZERO => ("w_0_discrimination", f64::NAN),
                        _ => continue,
                    };
                    plot.push(WeakPlotRow {
                        n: r.n,
                        kappa,
                        target: target.into(),
                        median: r.median,
                        q90: r.q90,
                        mean: r.mean,
                        std_err: r.std_err,
                    });
                }
                let disc: Option<f64> = read_config_kappa(&dir);
                for row in plot.iter_mut().filter(|r| r.kappa.is_nan()) {
                    row.kappa = disc.unwrap_or(f64::NAN);
                }
                write_csv(&output.join("weak_error.csv"), &plot)?;
                figures.push(Figure {
                    id: "weak_error".into(),
                    csv: "weak_error.csv".into(),
                    source_study: report.study.clone(),
                    x: axis("N", "N", "log"),
                    y: vec![axis("q90", "90th percentile of sup_t error", "linear")],
                    group_by: Some("target".into()),
                    reference: None,
                    expected_monotonicity: "decreasing".into(),
                });
            }
            _ => {}
        }
    }
    let manifest = Manifest { version: MANIFEST_VERSION, figures };
    fs::write(output.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
    Ok(manifest)
}

/// `κ` of the discrimination run recorded in a study's `config.toml`.
fn read_config_kappa(dir: &Path) -> Option<f64> {
    let text = fs::read_to_string(dir.join("config.toml")).ok()?;
    let spec = crate::config::StudySpec::from_toml_str(&text).ok()?;
    spec.discrimination.map(|d| d.kappa)
}

/// The JSON schema of `manifest.json`.
pub const MANIFEST_SCHEMA: &str = include_str!("../schema/manifest.schema.json");
