//! Run artifacts: results.json plus one CSV per recorded series.
//!
//! Two runs with the same config and seed produce byte-identical
//! artifacts except for the `metadata` block, which carries the
//! timestamp and is excluded from determinism comparisons.

use std::fs;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use anyhow::{Context, Result};
use serde::Serialize;

use crate::config::Config;

/// One scalar invariant check: `measured` compared against `tolerance`.
#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    /// Either "<=" (an error bound) or ">=" (a non-degeneracy floor).
    pub comparison: &'static str,
    pub pass: bool,
}

impl Check {
    /// A bound check: passes when the measured value is within tolerance.
    pub fn le(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
            comparison: "<=",
            pass: measured.is_finite() && measured <= tolerance,
        }
    }

    /// A floor check: passes when the measured value stays above tolerance.
    pub fn ge(name: impl Into<String>, measured: f64, tolerance: f64) -> Self {
        Check {
            name: name.into(),
            measured,
            tolerance,
            comparison: ">=",
            pass: measured.is_finite() && measured >= tolerance,
        }
    }
}

/// A time series destined for `<name>.csv`.
#[derive(Debug, Clone)]
pub struct Series {
    pub name: String,
    pub rows: Vec<(f64, f64)>,
}

impl Series {
    pub fn new(name: impl Into<String>) -> Self {
        Series {
            name: name.into(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, t: f64, value: f64) {
        self.rows.push((t, value));
    }
}

#[derive(Debug, Serialize)]
struct Results<'a> {
    suite: &'a str,
    seed: u64,
    /// The seeded generator family driving all randomized checks.
    generator: &'a str,
    effective_config: &'a Config,
    checks: &'a [Check],
    series: Vec<&'a str>,
    pass: bool,
    metadata: Metadata,
}

#[derive(Debug, Serialize)]
struct Metadata {
    timestamp_unix_ms: u128,
}

/// Report of a completed suite, ready to be written to the output directory.
#[derive(Debug)]
pub struct Report {
    pub suite: &'static str,
    pub seed: u64,
    pub config: Config,
    pub checks: Vec<Check>,
    pub series: Vec<Series>,
}

impl Report {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    /// Writes results.json and the series CSVs, then prints one line per
    /// check to stdout. Returns the overall verdict.
    pub fn write(&self, out_dir: &Path) -> Result<bool> {
        fs::create_dir_all(out_dir)
            .with_context(|| format!("cannot create output directory {}", out_dir.display()))?;

        for series in &self.series {
            let mut text = String::from("t,value\n");
            for &(t, value) in &series.rows {
                text.push_str(&format!("{t},{value}\n"));
            }
            let path = out_dir.join(format!("{}.csv", series.name));
            fs::write(&path, text)
                .with_context(|| format!("cannot write series file {}", path.display()))?;
        }

        let timestamp_unix_ms = SystemTime::now()
            .duration_since(UNIX_EPOCH)
            .map(|d| d.as_millis())
            .unwrap_or(0);
        let results = Results {
            suite: self.suite,
            seed: self.seed,
            generator: "chacha8",
            effective_config: &self.config,
            checks: &self.checks,
            series: self.series.iter().map(|s| s.name.as_str()).collect(),
            pass: self.pass(),
            metadata: Metadata { timestamp_unix_ms },
        };
        let json = serde_json::to_string_pretty(&results).context("cannot serialize results")?;
        let path = out_dir.join("results.json");
        fs::write(&path, json)
            .with_context(|| format!("cannot write results file {}", path.display()))?;

        for check in &self.checks {
            let verdict = if check.pass { "pass" } else { "FAIL" };
            println!(
                "[{verdict}] {}: {:e} {} {:e}",
                check.name, check.measured, check.comparison, check.tolerance
            );
        }
        println!(
            "{}: {} ({} checks, results in {})",
            self.suite,
            if self.pass() { "pass" } else { "FAIL" },
            self.checks.len(),
            out_dir.display()
        );
        Ok(self.pass())
    }
}
