//! Command-line entry point.
//!
//! Exit codes: 0 success, 2 a required trend check failed, 3 the blow-up
//! budget was exceeded, 4 invalid configuration, 1 any other error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sdnlw::config::{parse_ladder, AlphaRuleSpec, StudyKind, StudySpec};
use sdnlw::error::{CliError, CliResult, EXIT_CONFIG};
use sdnlw::output::StudyReport;
use sdnlw::plotdata::emit_plotdata;
use sdnlw::studies::run_and_write;

#[derive(Parser)]
#[command(name = "sdnlw", version, about = "Monte-Carlo lab for the truncated stochastic damped cubic wave equation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum StudyArg {
    Lambda,
    Wick,
    Strong,
    Weak,
    Tuned,
}

impl StudyArg {
    fn kind(self) -> StudyKind {
        match self {
            StudyArg::Lambda => StudyKind::LambdaAsymptotics,
            StudyArg::Wick => StudyKind::WickDecay,
            StudyArg::Strong => StudyKind::StrongTriviality,
            StudyArg::Weak => StudyKind::WeakLimit,
            StudyArg::Tuned => StudyKind::TunedDamping,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate the renormalized mass along a ladder of truncations.
    Renorm {
        /// Constant noise strength.
        #[arg(long, conflicts_with = "kappa")]
        alpha: Option<f64>,
        /// Use `α_N = κ/√log N` instead of a constant.
        #[arg(long)]
        kappa: Option<f64>,
        /// Ladder such as `4:128:x2`, `8:64:+8` or `8,16,32`.
        #[arg(long, default_value = "4:128:x2")]
        n_ladder: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a Monte-Carlo study described by a TOML file.
    Study {
        study: StudyArg,
        #[arg(long)]
        config: PathBuf,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        /// Overrides the ladder in the config file.
        #[arg(long)]
        n_ladder: Option<String>,
        /// Overrides the replica count in the config file.
        #[arg(long)]
        replicas: Option<usize>,
        #[arg(long, env = "SDNLW_WORKERS", default_value_t = 1)]
        workers: usize,
        /// Output directory; defaults to `output_dir` in the config file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert study directories into figure tables and a manifest.
    Plotdata {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn print_report(report: &StudyReport, out: &Path) {
    for c in &report.checks {
        let status = if c.passed { "PASS" } else { "FAIL" };
        let kind = if c.required { "required" } else { "informative" };
        println!("{status} [{kind}] {}: {}", c.name, c.detail);
    }
    if !report.blowup_exceeded.is_empty() {
        println!("blow-up budget exceeded at N = {:?}", report.blowup_exceeded);
    }
    println!("wrote {}", out.display());
}

fn run(cli: Cli) -> CliResult<i32> {
    match cli.command {
        Command::Renorm { alpha, kappa, n_ladder, out } => {
            let mut spec = StudySpec::new(StudyKind::LambdaAsymptotics, parse_ladder(&n_ladder)?);
            match (alpha, kappa) {
                (_, Some(k)) => {
                    spec.alpha_rule = AlphaRuleSpec::KappaOverSqrtLog;
                    spec.kappa = k;
                }
                (Some(a), None) => spec.alpha_rule = AlphaRuleSpec::Constant { value: a },
                (None, None) => {}
            }
            let report = run_and_write(&spec, 1, &out)?;
            print_report(&report, &out);
            Ok(report.exit_code())
        }
        Command::Study { study, config, seed, n_ladder, replicas, workers, out } => {
            let mut spec = StudySpec::from_file(&config)?;
            let kind = study.kind();
            if let Some(k) = spec.study {
                if k != kind {
                    return Err(CliError::Config(format!(
                        "config describes a {} study, not {}",
                        k.name(),
                        kind.name()
                    )));
                }
            }
            spec.study = Some(kind);
            if let Some(s) = seed {
                spec.seed = s;
            }
            if let Some(l) = n_ladder {
                spec.n_ladder = parse_ladder(&l)?;
            }
            if let Some(r) = replicas {
                spec.mc_replicas = r;
            }
            let out = out
                .or_else(|| spec.output_dir.clone())
                .ok_or_else(|| CliError::Config("no output directory: pass --out or set output_dir".into()))?;
            let report = run_and_write(&spec, workers, &out)?;
            print_report(&report, &out);
            Ok(report.exit_code())
        }
        Command::Plotdata { input, out } => {
            let manifest = emit_plotdata(&input, &out)?;
            for f in &manifest.figures {
                println!("{} -> {}", f.id, out.join(&f.csv).display());
            }
            Ok(0)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let code = match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
