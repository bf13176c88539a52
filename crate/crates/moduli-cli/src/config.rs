//! Run configuration: JSON on disk, validated before any work starts.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use moduli::decompositions::PoissonLie;
use moduli::lie_core::{build_algebra, weyl_normalize, CartanVector};
use moduli::verify::SuiteConfig;
use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    /// Local error tolerance of the holonomy integrator.
    pub ode: f64,
    /// Finite-difference step of bracket evaluations.
    pub fd: f64,
    /// Moment-map residual the solvers must reach.
    pub constraint: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { ode: 1e-10, fd: 1e-5, constraint: 1e-10 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub n: usize,
    pub t: f64,
    /// Twist matrix, (n-1) x (n-1), row-major. Empty means zero.
    pub u: Vec<f64>,
    /// Three spectra (one n-vector each) for `solve` and for commands that
    /// need a point of the moduli space when no input file is given.
    pub thetas: Option<Vec<Vec<f64>>>,
    pub tolerances: Tolerances,
    pub seed: u64,
    /// Suite names, or ["all"].
    pub suites: Vec<String>,
    pub output: Option<PathBuf>,
    /// Moment-map solutions per rank used by the geometric suites.
    pub solutions: usize,
    /// Per-check tolerance overrides, keyed by check name.
    pub thresholds: BTreeMap<String, f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            n: 2,
            t: 1.0,
            u: Vec::new(),
            thetas: None,
            tolerances: Tolerances::default(),
            seed: 2024,
            suites: vec!["all".into()],
            output: None,
            solutions: 20,
            thresholds: BTreeMap::new(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        let tol = &self.tolerances;
        if !(tol.ode > 0.0 && tol.fd > 0.0 && tol.constraint > 0.0) {
            return bad("all tolerances must be positive".into());
        }
        if !self.t.is_finite() {
            return bad("t must be finite".into());
        }
        self.twist()?;
        if let Some(th) = &self.thetas {
            self.cartan(th)?;
        }
        if self.solutions == 0 {
            return bad("solutions must be positive".into());
        }
        Ok(())
    }

    pub fn twist(&self) -> Result<DMatrix<f64>, CliError> {
        let m = self.n - 1;
        if self.u.is_empty() {
            return Ok(DMatrix::zeros(m, m));
        }
        if self.u.len() != m * m {
            return Err(CliError::Config(format!("u must have {} entries, got {}", m * m, self.u.len())));
        }
        let u = DMatrix::from_row_slice(m, m, &self.u);
        let defect = (&u + u.transpose()).amax();
        if defect > 1e-12 {
            return Err(CliError::Config(format!("u is not antisymmetric (defect {defect:.3e})")));
        }
        Ok(u)
    }

    fn cartan(&self, th: &[Vec<f64>]) -> Result<[CartanVector; 3], CliError> {
        if th.len() != 3 || th.iter().any(|v| v.len() != self.n) {
            return Err(CliError::Config(format!("thetas must be three vectors of length {}", self.n)));
        }
        let h = |v: &Vec<f64>| weyl_normalize(v).map_err(|e| CliError::Config(format!("thetas: {e}")));
        Ok([h(&th[0])?, h(&th[1])?, h(&th[2])?])
    }

    pub fn spectra(&self) -> Result<[CartanVector; 3], CliError> {
        match &self.thetas {
            Some(th) => self.cartan(th),
            None => Err(CliError::Config("this command needs `thetas` in the config".into())),
        }
    }

    pub fn poisson_lie(&self) -> Result<PoissonLie, CliError> {
        let alg = build_algebra(self.n).map_err(|e| CliError::Config(e.to_string()))?;
        PoissonLie::new(alg, self.t, self.twist()?).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn suite_config(&self) -> SuiteConfig {
        SuiteConfig {
            ns: vec![self.n],
            t: self.t,
            seed: self.seed,
            ode_tol: self.tolerances.ode,
            fd_step: self.tolerances.fd,
            solutions: self.solutions,
            thresholds: self.thresholds.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        RunConfig::default().validate().unwrap();
    }

    #[test]
    fn rejects_symmetric_twist_and_bad_tolerances() {
        let cfg = RunConfig { n: 3, u: vec![0.0, 1.0, 1.0, 0.0], ..RunConfig::default() };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
        let mut cfg = RunConfig::default();
        cfg.tolerances.ode = 0.0;
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn rejects_degenerate_thetas() {
        let cfg = RunConfig { thetas: Some(vec![vec![0.0, 0.0]; 3]), ..RunConfig::default() };
        assert!(matches!(cfg.validate(), Err(CliError::Config(_))));
    }

    #[test]
    fn unknown_fields_are_schema_errors() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"n": 2, "bogus": 1}"#).is_err());
    }
}
