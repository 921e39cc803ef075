//! Verification report: JSON for machines, a plain table for people.

use std::fmt::Write;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::config::{HardyGrid, RunConfig};
use crate::suites::{Skip, SuiteResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub version: String,
    pub seed: u64,
    pub grid: HardyGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub version: String,
    pub config_hash: String,
    pub environment: Environment,
    pub suites: Vec<SuiteResult>,
    pub skipped: Vec<Skip>,
    pub pass: bool,
}

pub fn config_hash(config: &RunConfig) -> String {
    hex::encode(Sha256::digest(config.canonical_json().as_bytes()))
}

impl Report {
    pub fn new(config: &RunConfig, seed: u64, suites: Vec<SuiteResult>) -> Self {
        let skipped = suites.iter().flat_map(|s| s.skipped.iter().cloned()).collect();
        let pass = suites.iter().all(SuiteResult::pass);
        let version = env!("CARGO_PKG_VERSION").to_string();
        Self {
            version: version.clone(),
            config_hash: config_hash(config),
            environment: Environment {
                version,
                seed,
                grid: config.hardy_grid(),
            },
            suites,
            skipped,
            pass,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "triple-scatter {}  seed {}  config {}", self.version, self.environment.seed, &self.config_hash[..12]);
        let _ = writeln!(out, "hardy grid N = {}, L = {}", self.environment.grid.n, self.environment.grid.l);
        for s in &self.suites {
            let _ = writeln!(out, "\n[{}] {}", if s.pass() { "pass" } else { "FAIL" }, s.name);
            for c in &s.checks {
                let _ = writeln!(
                    out,
                    "  {:<4} {:<40} {:>12.3e}  tol {:.0e}",
                    if c.pass { "ok" } else { "FAIL" },
                    c.tag,
                    c.residual,
                    c.tol
                );
            }
        }
        if !self.skipped.is_empty() {
            let _ = writeln!(out, "\nskipped ({}):", self.skipped.len());
            for s in &self.skipped {
                let _ = writeln!(out, "  {} {} at {}: {}", s.suite, s.tag, s.at, s.reason);
            }
        }
        let _ = writeln!(out, "\noverall: {}", if self.pass { "PASS" } else { "FAIL" });
        out
    }
}
