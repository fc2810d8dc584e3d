//! Solver settings. Flags override `FOLDCODE_*` variables, which override
//! the config file, which overrides the defaults.

use std::collections::BTreeMap;

use conic::SolverConfig;
use foldcode::model::Coefficients;
use serde::Deserialize;
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    pub tol: f64,
    pub max_iter: usize,
    pub workers: usize,
    pub coefficients: Coefficients,
}

impl Default for Settings {
    fn default() -> Self {
        let solver = SolverConfig::default();
        Self {
            tol: solver.tol_gap,
            max_iter: solver.max_iter,
            workers: std::thread::available_parallelism().map_or(1, |n| n.get()),
            coefficients: Coefficients::Exact,
        }
    }
}

/// Values given on the command line.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub tol: Option<f64>,
    pub max_iter: Option<usize>,
    pub workers: Option<usize>,
    pub coefficients: Option<Coefficients>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    tol: Option<f64>,
    max_iter: Option<usize>,
    workers: Option<usize>,
    coefficients: Option<String>,
}

pub const ENV_TOL: &str = "FOLDCODE_TOL";
pub const ENV_MAXITER: &str = "FOLDCODE_MAXITER";
pub const ENV_WORKERS: &str = "FOLDCODE_WORKERS";

impl Settings {
    /// `file` is the text of the config file, `env` the relevant variables.
    pub fn resolve(
        file: Option<&str>,
        env: &BTreeMap<String, String>,
        flags: &Overrides,
    ) -> Result<Self, String> {
        let mut s = Settings::default();
        if let Some(text) = file {
            let f: FileConfig =
                toml::from_str(text).map_err(|e| format!("config file: {}", e.message()))?;
            if let Some(v) = f.tol {
                s.tol = v;
            }
            if let Some(v) = f.max_iter {
                s.max_iter = v;
            }
            if let Some(v) = f.workers {
                s.workers = v;
            }
            if let Some(v) = f.coefficients {
                s.coefficients = v.parse().map_err(|e| format!("config file: {e}"))?;
            }
        }
        if let Some(v) = env.get(ENV_TOL) {
            s.tol = parse_env(ENV_TOL, v)?;
        }
        if let Some(v) = env.get(ENV_MAXITER) {
            s.max_iter = parse_env(ENV_MAXITER, v)?;
        }
        if let Some(v) = env.get(ENV_WORKERS) {
            s.workers = parse_env(ENV_WORKERS, v)?;
        }
        if let Some(v) = flags.tol {
            s.tol = v;
        }
        if let Some(v) = flags.max_iter {
            s.max_iter = v;
        }
        if let Some(v) = flags.workers {
            s.workers = v;
        }
        if let Some(v) = flags.coefficients {
            s.coefficients = v;
        }
        s.validate()?;
        Ok(s)
    }

    fn validate(&self) -> Result<(), String> {
        if !(self.tol.is_finite() && self.tol > 0.0 && self.tol < 1.0) {
            return Err(format!("tolerance {} outside (0, 1)", self.tol));
        }
        if self.max_iter == 0 {
            return Err("max_iter must be positive".into());
        }
        if self.workers == 0 {
            return Err("workers must be positive".into());
        }
        Ok(())
    }

    pub fn solver(&self) -> SolverConfig {
        SolverConfig {
            tol_gap: self.tol,
            tol_feas: self.tol,
            max_iter: self.max_iter,
            ..SolverConfig::default()
        }
    }

    /// SHA-256 of the settings that affect results; `workers` does not.
    pub fn hash(&self) -> String {
        let canonical = format!(
            "tol={:e};max_iter={};coefficients={}",
            self.tol,
            self.max_iter,
            self.coefficients.as_str()
        );
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

fn parse_env<T: std::str::FromStr>(key: &str, v: &str) -> Result<T, String> {
    v.trim()
        .parse()
        .map_err(|_| format!("{key}: cannot parse {v:?}"))
}

pub fn env_snapshot() -> BTreeMap<String, String> {
    [ENV_TOL, ENV_MAXITER, ENV_WORKERS]
        .iter()
        .filter_map(|k| std::env::var(k).ok().map(|v| (k.to_string(), v)))
        .collect()
}
