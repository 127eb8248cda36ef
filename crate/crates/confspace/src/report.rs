//! Machine-readable run reports: one verdict row per check, plus CSV
//! trajectory artifacts. Reports are byte-identical for identical
//! (spec, seed, shard count) inputs: field order is fixed, floats use
//! shortest-roundtrip formatting, and nothing timestamps.

use serde::Serialize;
use std::fmt::Write as _;
use std::path::Path;

pub const REPORT_SCHEMA: &str = "confspace-report/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    /// Informational check that never affects the exit code.
    Soft,
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub check: String,
    pub verdict: Verdict,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub estimate: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stderr: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

impl CheckResult {
    pub fn pass(check: impl Into<String>) -> Self {
        CheckResult {
            check: check.into(),
            verdict: Verdict::Pass,
            estimate: None,
            stderr: None,
            tolerance: None,
            witness: None,
        }
    }

    pub fn of(check: impl Into<String>, ok: bool) -> Self {
        CheckResult {
            check: check.into(),
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            estimate: None,
            stderr: None,
            tolerance: None,
            witness: None,
        }
    }

    pub fn soft(check: impl Into<String>) -> Self {
        CheckResult {
            verdict: Verdict::Soft,
            ..CheckResult::pass(check)
        }
    }

    pub fn with_estimate(mut self, estimate: f64) -> Self {
        self.estimate = Some(estimate);
        self
    }

    pub fn with_stderr(mut self, stderr: f64) -> Self {
        self.stderr = Some(stderr);
        self
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = Some(tolerance);
        self
    }

    pub fn with_witness(mut self, witness: impl Into<String>) -> Self {
        self.witness = Some(witness.into());
        self
    }
}

/// A CSV artifact: a trajectory or table to be written next to the report.
#[derive(Debug, Clone, Serialize)]
pub struct CsvArtifact {
    pub name: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl CsvArtifact {
    pub fn new(name: impl Into<String>, header: &[&str]) -> Self {
        CsvArtifact {
            name: name.into(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push_row(&mut self, cells: &[String]) {
        self.rows.push(cells.to_vec());
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{}", self.header.join(","));
        for row in &self.rows {
            let _ = writeln!(out, "{}", row.join(","));
        }
        out
    }
}

/// Shortest-roundtrip cell formatting shared by all CSV writers.
pub fn csv_num(x: f64) -> String {
    format!("{x}")
}

#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub schema: &'static str,
    pub library_version: &'static str,
    pub suite: String,
    pub seed: u64,
    pub shards: u32,
    pub spec_sha256: String,
    pub pass: bool,
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn new(
        suite: &str,
        seed: u64,
        shards: u32,
        spec_sha256: String,
        checks: Vec<CheckResult>,
    ) -> Self {
        let pass = checks.iter().all(|c| c.verdict != Verdict::Fail);
        Report {
            schema: REPORT_SCHEMA,
            library_version: env!("CARGO_PKG_VERSION"),
            suite: suite.to_string(),
            seed,
            shards,
            spec_sha256,
            pass,
            checks,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serialization");
        s.push('\n');
        s
    }

    /// Write report.json and CSV artifacts into a directory.
    pub fn write(&self, dir: &Path, artifacts: &[CsvArtifact]) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("report.json"), self.to_json())?;
        for artifact in artifacts {
            std::fs::write(
                dir.join(format!("{}.csv", artifact.name)),
                artifact.to_csv(),
            )?;
        }
        Ok(())
    }
}

/// SHA-256 of raw spec bytes, hex-encoded.
pub fn sha256_hex(bytes: &[u8]) -> String {
    use sha2::{Digest, Sha256};
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    let out = hasher.finalize();
    let mut s = String::with_capacity(64);
    for b in out {
        let _ = write!(s, "{b:02x}");
    }
    s
}
