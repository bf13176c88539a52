//! Verification reports: JSON with a CSV summary alongside.

use std::path::Path;

use moduli::verify::SuiteResult;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Status {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub status: Status,
    pub residual: f64,
    pub tolerance: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub package: String,
    pub version: String,
    pub os: String,
    pub arch: String,
}

impl Environment {
    pub fn current() -> Self {
        Self {
            package: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            os: std::env::consts::OS.into(),
            arch: std::env::consts::ARCH.into(),
        }
    }
}

/// Wall time per suite; kept apart from the checks so that the rest of the
/// report is reproducible byte for byte.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Timing {
    pub suite: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub environment: Environment,
    pub config: RunConfig,
    pub checks: Vec<CheckRecord>,
    pub timing: Vec<Timing>,
}

impl Report {
    pub fn new(config: &RunConfig, mut results: Vec<SuiteResult>) -> Self {
        results.sort_by(|a, b| a.suite.cmp(&b.suite));
        let checks = results
            .iter()
            .flat_map(|r| {
                r.checks.iter().map(move |c| CheckRecord {
                    suite: r.suite.clone(),
                    name: c.name.clone(),
                    status: if c.passed { Status::Pass } else { Status::Fail },
                    residual: c.residual,
                    tolerance: c.tolerance,
                    samples: c.samples,
                })
            })
            .collect();
        let timing = results.iter().map(|r| Timing { suite: r.suite.clone(), seconds: r.seconds }).collect();
        Self { environment: Environment::current(), config: config.clone(), checks, timing }
    }

    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.status == Status::Pass)
    }

    /// Write `path` (JSON) and the CSV summary next to it.
    pub fn write(&self, path: &Path) -> Result<(), CliError> {
        let io = |e: std::io::Error| CliError::Failure(format!("{}: {e}", path.display()));
        let json = serde_json::to_string_pretty(self).map_err(|e| CliError::Failure(e.to_string()))?;
        std::fs::write(path, json + "\n").map_err(io)?;
        let mut w = csv::Writer::from_path(path.with_extension("csv")).map_err(|e| CliError::Failure(e.to_string()))?;
        for c in &self.checks {
            w.serialize(c).map_err(|e| CliError::Failure(e.to_string()))?;
        }
        w.flush().map_err(io)
    }

    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{:<5} {:<44} residual {:.3e}  tolerance {:.1e}\n",
                if c.status == Status::Pass { "PASS" } else { "FAIL" },
                c.name,
                c.residual,
                c.tolerance
            ));
        }
        out
    }
}
