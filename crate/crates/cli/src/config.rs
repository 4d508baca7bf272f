//! Study specifications read from TOML files.
//!
//! ```toml
//! study = "strong_triviality"
//! n_ladder = [8, 16, 32, 64]
//! alpha_rule = { kind = "constant", value = 1.0 }
//! t_final = 1.0
//! epsilon = 0.25
//! mc_replicas = 64
//! seed = 1
//! initial_data = "smooth_bump"
//! ```
//!
//! Every field except `n_ladder` has a default; see [`StudySpec`].

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use sdnlw_core::integrator::{dyadic_step, AlphaRule, InitialData};

use crate::error::{CliError, CliResult};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StudyKind {
    LambdaAsymptotics,
    WickDecay,
    StrongTriviality,
    WeakLimit,
    TunedDamping,
}

impl StudyKind {
    pub fn name(&self) -> &'static str {
        match self {
            StudyKind::LambdaAsymptotics => "lambda_asymptotics",
            StudyKind::WickDecay => "wick_decay",
            StudyKind::StrongTriviality => "strong_triviality",
            StudyKind::WeakLimit => "weak_limit",
            StudyKind::TunedDamping => "tuned_damping",
        }
    }
}

/// Noise strength as a function of `N`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum AlphaRuleSpec {
    /// `α_N ≡ value`.
    Constant { value: f64 },
    /// `α_N = κ/sqrt(log N)`.
    KappaOverSqrtLog,
    /// `α_N` listed per ladder entry, in ladder order.
    Explicit { values: Vec<f64> },
    /// `α_N² = 2α̃_N γ²/log N`.
    TunedGamma { gamma: f64 },
}

impl Default for AlphaRuleSpec {
    fn default() -> Self {
        AlphaRuleSpec::Constant { value: 1.0 }
    }
}

/// Damping coefficient `α̃_N` in front of `∂_t u`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DampingRule {
    Constant { value: f64 },
    /// `α̃_N = 1/log N`.
    InverseLog,
}

impl Default for DampingRule {
    fn default() -> Self {
        DampingRule::Constant { value: 1.0 }
    }
}

impl DampingRule {
    pub fn damping(&self, n: usize) -> f64 {
        match self {
            DampingRule::Constant { value } => *value,
            DampingRule::InverseLog => 1.0 / (n as f64).ln(),
        }
    }
}

/// Time sampling of the Wick-power norms.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WickSettings {
    #[serde(default = "default_time_points")]
    pub time_points: usize,
    #[serde(default = "default_oversample")]
    pub oversample: usize,
}

impl Default for WickSettings {
    fn default() -> Self {
        WickSettings {
            time_points: default_time_points(),
            oversample: default_oversample(),
        }
    }
}

/// Comparative run of the weak study: errors of `u_N` to `w_κ` and to the
/// massless `w_0` at one truncation level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discrimination {
    pub kappa: f64,
    pub n: usize,
    pub replicas: usize,
}

/// Full description of one study run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySpec {
    /// Optional in files; the `study` subcommand supplies it.
    #[serde(default)]
    pub study: Option<StudyKind>,
    pub n_ladder: Vec<usize>,
    #[serde(default)]
    pub alpha_rule: AlphaRuleSpec,
    #[serde(default)]
    pub kappa: f64,
    #[serde(default = "default_t_final")]
    pub t_final: f64,
    /// Fixed step for every `N`; by default the dyadic rule
    /// `h_N = max{2^{-j} ≤ min(0.05, 0.5/N)}`.
    #[serde(default)]
    pub h: Option<f64>,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    #[serde(default = "default_replicas")]
    pub mc_replicas: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    #[serde(default = "default_initial")]
    pub initial_data: String,
    #[serde(default)]
    pub damping: DampingRule,
    #[serde(default)]
    pub wick: WickSettings,
    #[serde(default)]
    pub discrimination: Option<Discrimination>,
    /// Largest tolerated fraction of blown-up replicas per `N`.
    #[serde(default = "default_blowup_budget")]
    pub blowup_budget: f64,
    /// Spacing of the times at which errors against a limit are compared.
    #[serde(default = "default_compare_dt")]
    pub compare_dt: f64,
}

fn default_time_points() -> usize {
    9
}
fn default_oversample() -> usize {
    2
}
fn default_t_final() -> f64 {
    1.0
}
fn default_epsilon() -> f64 {
    0.25
}
fn default_replicas() -> usize {
    64
}
fn default_initial() -> String {
    "smooth_bump".into()
}
fn default_blowup_budget() -> f64 {
    0.1
}
fn default_compare_dt() -> f64 {
    1.0 / 32.0
}

fn config_err<T>(msg: impl Into<String>) -> CliResult<T> {
    Err(CliError::Config(msg.into()))
}

impl StudySpec {
    /// A spec with every default and the given ladder.
    pub fn new(study: StudyKind, n_ladder: Vec<usize>) -> Self {
        StudySpec {
            study: Some(study),
            n_ladder,
            alpha_rule: AlphaRuleSpec::default(),
            kappa: 0.0,
            t_final: default_t_final(),
            h: None,
            epsilon: default_epsilon(),
            mc_replicas: default_replicas(),
            seed: 0,
            output_dir: None,
            initial_data: default_initial(),
            damping: DampingRule::default(),
            wick: WickSettings::default(),
            discrimination: None,
            blowup_budget: default_blowup_budget(),
            compare_dt: default_compare_dt(),
        }
    }

    pub fn from_toml_str(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("study specs serialize to TOML")
    }

    pub fn kind(&self) -> CliResult<StudyKind> {
        self.study.ok_or_else(|| CliError::Config("study kind is not set".into()))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.n_ladder.is_empty() {
            return config_err("n_ladder is empty");
        }
        if self.n_ladder.iter().any(|n| *n < 2) {
            return config_err("n_ladder entries must be at least 2");
        }
        if self.n_ladder.windows(2).any(|w| w[1] <= w[0]) {
            return config_err("n_ladder must be strictly increasing");
        }
        if !(self.t_final > 0.0) || !(self.epsilon > 0.0) || self.epsilon >= 1.0 {
            return config_err("need T > 0 and 0 < epsilon < 1");
        }
        if self.mc_replicas < 1 {
            return config_err("mc_replicas must be at least 1");
        }
        if self.initial().is_none() {
            return config_err(format!("unknown initial_data '{}'", self.initial_data));
        }
        if let AlphaRuleSpec::Explicit { values } = &self.alpha_rule {
            if values.len() != self.n_ladder.len() {
                return config_err("explicit alpha list must match n_ladder");
            }
        }
        if !(0.0..=1.0).contains(&self.blowup_budget) {
            return config_err("blowup_budget must lie in [0, 1]");
        }
        if let Some(h) = self.h {
            if !(h > 0.0) {
                return config_err("h must be positive");
            }
        }
        if self.wick.time_points < 2 || self.wick.oversample < 2 {
            return config_err("wick needs time_points >= 2 and oversample >= 2");
        }
        if let Some(d) = &self.discrimination {
            if d.n < 2 || d.replicas < 1 {
                return config_err("discrimination needs n >= 2 and replicas >= 1");
            }
        }
        Ok(())
    }

    pub fn initial(&self) -> Option<InitialData> {
        InitialData::from_name(&self.initial_data)
    }

    pub fn alpha_rule(&self) -> AlphaRule {
        match &self.alpha_rule {
            AlphaRuleSpec::Constant { value } => AlphaRule::Constant(*value),
            AlphaRuleSpec::KappaOverSqrtLog => AlphaRule::KappaOverSqrtLog,
            AlphaRuleSpec::Explicit { values } => {
                AlphaRule::Explicit(self.n_ladder.iter().copied().zip(values.iter().copied()).collect())
            }
            AlphaRuleSpec::TunedGamma { gamma } => AlphaRule::TunedGamma(*gamma),
        }
    }

    /// Step used at truncation `n`.
    pub fn step(&self, n: usize) -> f64 {
        self.h.unwrap_or_else(|| dyadic_step(n))
    }

    /// Step of the common noise clock: the finest step of the ladder.
    pub fn noise_dt(&self) -> f64 {
        self.n_ladder
            .iter()
            .map(|n| self.step(*n))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Parses a ladder written as `a:b:xk` (geometric, factor `k`), `a:b:+k`
/// (arithmetic) or a comma-separated list.
pub fn parse_ladder(text: &str) -> CliResult<Vec<usize>> {
    let bad = || CliError::Config(format!("cannot parse ladder '{text}'"));
    let num = |s: &str| s.trim().parse::<usize>().map_err(|_| bad());
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [start, end, step] => {
            let (start, end) = (num(start)?, num(end)?);
            let mut out = Vec::new();
            let mut n = start;
            if let Some(k) = step.strip_prefix('x') {
                let k = num(k)?;
                if k < 2 || start == 0 {
                    return Err(bad());
                }
                while n <= end {
                    out.push(n);
                    n *= k;
                }
            } else if let Some(k) = step.strip_prefix('+') {
                let k = num(k)?;
                if k == 0 {
                    return Err(bad());
                }
                while n <= end {
                    out.push(n);
                    n += k;
                }
            } else {
                return Err(bad());
            }
            Ok(out)
        }
        [list] => list.split(',').map(num).collect(),
        _ => Err(bad()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladders_parse() {
        assert_eq!(parse_ladder("4:64:x2").unwrap(), vec![4, 8, 16, 32, 64]);
        assert_eq!(parse_ladder("8,16, 32").unwrap(), vec![8, 16, 32]);
        assert_eq!(parse_ladder("2:8:+3").unwrap(), vec![2, 5, 8]);
        assert!(parse_ladder("4:64:y2").is_err());
    }

    #[test]
    fn toml_round_trip_with_defaults() {
        let spec = StudySpec::from_toml_str(
            "study = \"weak_limit\"\nn_ladder = [16, 32]\nalpha_rule = { kind = \"kappa_over_sqrt_log\" }\nkappa = 1.0\n",
        )
        .unwrap();
        assert_eq!(spec.kind().unwrap(), StudyKind::WeakLimit);
        assert_eq!(spec.mc_replicas, 64);
        assert_eq!(spec.epsilon, 0.25);
        assert!(spec.validate().is_ok());
        let again = StudySpec::from_toml_str(&spec.to_toml_string()).unwrap();
        assert_eq!(again, spec);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = StudySpec::new(StudyKind::StrongTriviality, vec![8, 8]);
        assert!(spec.validate().is_err());
        spec.n_ladder = vec![1, 8];
        assert!(spec.validate().is_err());
        spec.n_ladder = vec![8, 16];
        spec.initial_data = "square".into();
        assert!(spec.validate().is_err());
        assert!(StudySpec::from_toml_str("n_ladder = [8]\nbogus = 1\n").is_err());
    }

    #[test]
    fn dyadic_steps_share_a_clock() {
        let spec = StudySpec::new(StudyKind::StrongTriviality, vec![8, 16, 32, 64]);
        assert_eq!(spec.noise_dt(), 1.0 / 128.0);
        assert_eq!(spec.step(8), 1.0 / 32.0);
    }
}
