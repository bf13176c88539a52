//! Command-line runner: verification suites, moment-map solves, the maps
//! xi and chi, bracket evaluations and holonomies.
//!
//! Exit codes: 0 success (all checks pass), 1 failed checks or no solution,
//! 2 configuration or input errors.

mod commands;
mod config;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use moduli::orbits_moment::Level;

use config::RunConfig;

#[derive(Debug)]
pub enum CliError {
    /// Configuration, schema or input problem (exit 2).
    Config(String),
    /// A computation failed or a check did not pass (exit 1).
    Failure(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Failure(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Failure(m) => write!(f, "{m}"),
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "moduli", version, about = "Poisson geometry of SU(n) multiplicity spaces")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output path (stdout when absent).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Seed override.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Rank override.
    #[arg(long, global = true)]
    n: Option<usize>,
    /// Deformation parameter override.
    #[arg(long, global = true)]
    t: Option<f64>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run verification suites and write a report.
    Verify {
        /// Suite name or `all`.
        #[arg(long)]
        suite: Option<String>,
    },
    /// Solve the moment-map equation on one level.
    Solve {
        #[arg(long, value_enum, default_value_t = LevelArg::Zero)]
        level: LevelArg,
    },
    /// Apply xi (residues -> graph data) or chi (G^3 -> K*^3).
    Map {
        #[arg(value_enum)]
        which: MapArg,
        /// JSON file with a `matrices`, `points` or `residues` array.
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Evaluate a bracket: kk|goldman <contour> <contour>, fr <pair index>,
    /// sklyanin <compact|dual|double> <i,j,re|im> <i,j,re|im>.
    Bracket {
        kind: String,
        operands: Vec<String>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
    /// Holonomy of a catalogue contour for residues from --input or the
    /// configured spectra.
    Holonomy {
        contour: String,
        #[arg(long)]
        catalogue: Option<PathBuf>,
        #[arg(long)]
        input: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LevelArg {
    Zero,
    Kstar,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MapArg {
    Xi,
    Chi,
}

fn load_config(c: &Common) -> Result<RunConfig, CliError> {
    let mut cfg = match &c.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(n) = c.n {
        cfg.n = n;
    }
    if let Some(t) = c.t {
        cfg.t = t;
    }
    if let Some(o) = &c.out {
        cfg.output = Some(o.clone());
    }
    cfg.validate()?;
    Ok(cfg)
}

fn emit(value: &serde_json::Value, out: Option<&Path>) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).map_err(|e| CliError::Failure(e.to_string()))? + "\n";
    match out {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Failure(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = load_config(&cli.common)?;
    let out = cfg.output.clone();
    match cli.command {
        Command::Verify { suite } => {
            if let Some(s) = suite {
                cfg.suites = vec![s];
            }
            let report = commands::verify(&cfg)?;
            eprint!("{}", report.summary());
            match &out {
                Some(p) => report.write(p)?,
                None => emit(&serde_json::to_value(&report).map_err(|e| CliError::Failure(e.to_string()))?, None)?,
            }
            if !report.all_pass() {
                return Err(CliError::Failure("some checks failed".into()));
            }
            Ok(())
        }
        Command::Solve { level } => {
            let level = match level {
                LevelArg::Zero => Level::Zero,
                LevelArg::Kstar => Level::KStar,
            };
            emit(&commands::solve(&cfg, level)?, out.as_deref())
        }
        Command::Map { which, input } => {
            let v = match which {
                MapArg::Xi => commands::map_xi(&cfg, input.as_deref())?,
                MapArg::Chi => commands::map_chi(&cfg, input.as_deref())?,
            };
            emit(&v, out.as_deref())
        }
        Command::Bracket { kind, operands, input } => {
            emit(&commands::bracket(&cfg, &kind, &operands, input.as_deref())?, out.as_deref())
        }
        Command::Holonomy { contour, catalogue, input } => {
            emit(&commands::holonomy_cmd(&cfg, &contour, catalogue.as_deref(), input.as_deref())?, out.as_deref())
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.code())
        }
    }
}
