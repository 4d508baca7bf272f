//! Study results and their files.
//!
//! Every study directory holds `records.csv` (one row per replica, truncation
//! and diagnostic), `summary.csv` (replica statistics per truncation and
//! diagnostic), `study.json` (trend checks and run metadata) and
//! `config.toml` (the spec that produced it). Numbers are written in Rust's
//! shortest round-trip format, so identical runs give identical bytes.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use sdnlw_core::diagnostics::McSummary;

use crate::config::StudySpec;
use crate::error::{CliResult, EXIT_ASSERTION, EXIT_BLOWUP, EXIT_OK};

/// One value of one diagnostic for one replica, with the parameters needed to
/// re-run it in isolation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyRecord {
    pub study: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub seed: u64,
    pub replica: u64,
    pub time: f64,
    pub diagnostic: String,
    pub value: f64,
    pub blowup: bool,
    pub alpha: f64,
    pub lambda: f64,
    pub sigma: f64,
    pub damping: f64,
    pub kappa: f64,
    pub h: f64,
    pub epsilon: f64,
}

/// Replica statistics of one diagnostic at one truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub n: usize,
    pub quantity: String,
    pub lambda: f64,
    pub count: usize,
    pub mean: f64,
    pub std_err: f64,
    pub median: f64,
    pub q90: f64,
    pub blowups: usize,
}

impl SummaryRow {
    pub fn new(n: usize, quantity: &str, lambda: f64, s: &McSummary) -> Self {
        SummaryRow {
            n,
            quantity: quantity.to_string(),
            lambda,
            count: s.count,
            mean: s.mean,
            std_err: s.std_err,
            median: s.median,
            q90: s.q90,
            blowups: s.blowups,
        }
    }
}

/// Outcome of one trend assertion.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Only required checks decide the exit code.
    pub required: bool,
    pub detail: String,
}

impl Check {
    pub fn required(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, required: true, detail }
    }

    pub fn informative(name: &str, passed: bool, detail: String) -> Self {
        Check { name: name.into(), passed, required: false, detail }
    }
}

/// What a study run produced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyReport {
    pub study: String,
    pub n_ladder: Vec<usize>,
    pub epsilon: f64,
    pub kappa: f64,
    pub t_final: f64,
    pub seed: u64,
    pub replicas: usize,
    pub checks: Vec<Check>,
    /// Truncations whose blow-up fraction exceeded the budget.
    pub blowup_exceeded: Vec<usize>,
    #[serde(skip)]
    pub summary: Vec<SummaryRow>,
    #[serde(skip)]
    pub records: Vec<StudyRecord>,
}

impl StudyReport {
    pub fn new(spec: &StudySpec, study: &str) -> Self {
        StudyReport {
            study: study.to_string(),
            n_ladder: spec.n_ladder.clone(),
            epsilon: spec.epsilon,
            kappa: spec.kappa,
            t_final: spec.t_final,
            seed: spec.seed,
            replicas: spec.mc_replicas,
            checks: Vec::new(),
            blowup_exceeded: Vec::new(),
            summary: Vec::new(),
            records: Vec::new(),
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn exit_code(&self) -> i32 {
        if !self.blowup_exceeded.is_empty() {
            EXIT_BLOWUP
        } else if self.checks.iter().any(|c| c.required && !c.passed) {
            EXIT_ASSERTION
        } else {
            EXIT_OK
        }
    }

    pub fn summary_of(&self, n: usize, quantity: &str) -> Option<&SummaryRow> {
        self.summary.iter().find(|r| r.n == n && r.quantity == quantity)
    }

    /// Values of `field` for `quantity` along the ladder.
    pub fn ladder_values(&self, quantity: &str, field: impl Fn(&SummaryRow) -> f64) -> Vec<f64> {
        self.n_ladder
            .iter()
            .filter_map(|n| self.summary_of(*n, quantity))
            .map(field)
            .collect()
    }

    /// Writes the standard files into `dir`.
    pub fn write(&self, spec: &StudySpec, dir: &Path) -> CliResult<()> {
        fs::create_dir_all(dir)?;
        write_csv(&dir.join("records.csv"), &self.records)?;
        write_csv(&dir.join("summary.csv"), &self.summary)?;
        fs::write(dir.join("study.json"), serde_json::to_string_pretty(self)? + "\n")?;
        fs::write(dir.join("config.toml"), spec.to_toml_string())?;
        Ok(())
    }
}

/// Writes RFC 4180 CSV with a header row taken from the field names.
pub fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> CliResult<()> {
    let mut w = csv::Writer::from_path(path)?;
    for row in rows {
        w.serialize(row)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<T: for<'de> Deserialize<'de>>(path: &Path) -> CliResult<Vec<T>> {
    let mut r = csv::Reader::from_path(path)?;
    let rows = r.deserialize().collect::<Result<Vec<T>, _>>()?;
    Ok(rows)
}

/// Summary of `values`, or `None` when every replica blew up.
pub fn summarize(values: &[f64], blowups: usize) -> Option<McSummary> {
    McSummary::from_values(values, blowups).ok()
}

/// Check that the 90th percentiles strictly decrease over the last three
/// entries (or all entries, if fewer).
pub fn q90_tail_check(name: &str, report: &StudyReport, quantity: &str) -> Check {
    let q = report.ladder_values(quantity, |r| r.q90);
    let tail = &q[q.len().saturating_sub(3)..];
    let passed = tail.len() == q.len().min(3) && tail.len() >= 2 && sdnlw_core::diagnostics::strictly_decreasing(tail);
    Check::required(name, passed, format!("q90 of {quantity} over the ladder: {q:?}"))
}
