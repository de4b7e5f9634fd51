//! Experiment records and their CSV and JSON forms.
//!
//! A CSV record looks like
//!
//! ```text
//! # permlab-schema v1
//! # subcommand: endgame
//! # config: lambda=1000 l=1 m=4 n=12 seed=7 trials=500
//! trial,status,...
//! 0,ok,...
//! # summary: success_rate=493/500
//! # warning: ...
//! ```
//!
//! Everything in the CSV is a function of the configuration. Wall-clock
//! time and the timestamp live in the metadata sidecar only.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::config::Subcommand;
use crate::error::{usage, CliError};

pub const SCHEMA_LINE: &str = "# permlab-schema v1";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedAudit {
    pub root_seed: u64,
    /// How stream ids map to trials.
    pub streams: String,
    pub generator: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRecord {
    pub subcommand: Subcommand,
    pub config: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
    /// Probabilistic bounds that fell short; the run still exits 0.
    pub warnings: Vec<String>,
    /// Failed assert-always invariants; the run exits 1.
    pub violations: Vec<String>,
    /// Per-trial trajectories and diagnostics, written as a sidecar.
    pub traces: Option<Value>,
    /// SVG chart, written when a chart path is configured.
    #[serde(skip)]
    pub chart: Option<String>,
    pub seed_audit: Option<SeedAudit>,
    pub wall_clock_secs: f64,
    pub version: String,
}

impl ExperimentRecord {
    pub fn new(subcommand: Subcommand, config: Vec<(String, String)>, columns: &[&str]) -> Self {
        ExperimentRecord {
            subcommand,
            config,
            columns: columns.iter().map(|c| c.to_string()).collect(),
            rows: Vec::new(),
            summary: Vec::new(),
            warnings: Vec::new(),
            violations: Vec::new(),
            traces: None,
            chart: None,
            seed_audit: None,
            wall_clock_secs: 0.0,
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }

    pub fn push_row(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn add_summary(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Values of one column, in row order.
    pub fn column_values(&self, name: &str) -> Option<Vec<&str>> {
        let i = self.column(name)?;
        Some(self.rows.iter().map(|r| r[i].as_str()).collect())
    }

    pub fn is_vacuous(&self) -> bool {
        self.summary_value("vacuous") == Some("true")
    }

    pub fn to_csv(&self) -> Result<String, CliError> {
        let mut out = String::new();
        out.push_str(SCHEMA_LINE);
        out.push('\n');
        let _ = writeln!(out, "# subcommand: {}", self.subcommand);
        let cfg: Vec<String> = self
            .config
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        let _ = writeln!(out, "# config: {}", cfg.join(" "));
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record(&self.columns)
            .map_err(|e| CliError::Io(e.to_string()))?;
        for r in &self.rows {
            w.write_record(r).map_err(|e| CliError::Io(e.to_string()))?;
        }
        let body = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| CliError::Io(e.to_string()))?);
        for (k, v) in &self.summary {
            let _ = writeln!(out, "# summary: {k}={v}");
        }
        for w in &self.warnings {
            let _ = writeln!(out, "# warning: {w}");
        }
        for v in &self.violations {
            let _ = writeln!(out, "# violation: {v}");
        }
        Ok(out)
    }

    /// Data in JSON: the same content as the CSV.
    pub fn to_json(&self) -> Value {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|r| {
                Value::Object(
                    self.columns
                        .iter()
                        .cloned()
                        .zip(r.iter().map(|v| json!(v)))
                        .collect(),
                )
            })
            .collect();
        json!({
            "schema": "permlab-schema v1",
            "subcommand": self.subcommand,
            "config": self.config.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
            "columns": self.columns,
            "rows": rows,
            "summary": self.summary.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
            "warnings": self.warnings,
            "violations": self.violations,
        })
    }

    /// Everything needed to rerun, plus the non-reproducible fields.
    pub fn metadata(&self, timestamp_unix: u64) -> Value {
        json!({
            "timestamp_unix": timestamp_unix,
            "wall_clock_secs": self.wall_clock_secs,
            "version": self.version,
            "subcommand": self.subcommand,
            "config": self.config.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
            "seed_audit": self.seed_audit,
            "rows": self.rows.len(),
            "summary": self.summary.iter().cloned().collect::<std::collections::BTreeMap<_, _>>(),
            "warnings": self.warnings,
            "violations": self.violations,
        })
    }

    /// Read back a CSV written by [`ExperimentRecord::to_csv`].
    pub fn from_csv(text: &str) -> Result<Self, CliError> {
        let mut lines = text.lines();
        if lines.next() != Some(SCHEMA_LINE) {
            return Err(usage("not a permlab v1 record (missing schema line)"));
        }
        let mut subcommand = None;
        let mut config = Vec::new();
        let mut summary = Vec::new();
        let mut warnings = Vec::new();
        let mut violations = Vec::new();
        let mut data = String::new();
        for line in lines {
            if let Some(rest) = line.strip_prefix("# subcommand: ") {
                subcommand = Some(rest.trim().parse::<Subcommand>()?);
            } else if let Some(rest) = line.strip_prefix("# config:") {
                config = rest
                    .split_whitespace()
                    .filter_map(|kv| {
                        kv.split_once('=')
                            .map(|(k, v)| (k.to_string(), v.to_string()))
                    })
                    .collect();
            } else if let Some(rest) = line.strip_prefix("# summary: ") {
                if let Some((k, v)) = rest.split_once('=') {
                    summary.push((k.to_string(), v.to_string()));
                }
            } else if let Some(rest) = line.strip_prefix("# warning: ") {
                warnings.push(rest.to_string());
            } else if let Some(rest) = line.strip_prefix("# violation: ") {
                violations.push(rest.to_string());
            } else if !line.starts_with('#') {
                data.push_str(line);
                data.push('\n');
            }
        }
        let subcommand = subcommand.ok_or_else(|| usage("record has no subcommand line"))?;
        let mut rdr = csv::ReaderBuilder::new().from_reader(data.as_bytes());
        let columns: Vec<String> = rdr
            .headers()
            .map_err(|e| usage(format!("bad CSV header: {e}")))?
            .iter()
            .map(String::from)
            .collect();
        let mut rows = Vec::new();
        for r in rdr.records() {
            let r = r.map_err(|e| usage(format!("bad CSV row: {e}")))?;
            rows.push(r.iter().map(String::from).collect());
        }
        let mut rec = ExperimentRecord::new(subcommand, config, &[]);
        rec.columns = columns;
        rec.rows = rows;
        rec.summary = summary;
        rec.warnings = warnings;
        rec.violations = violations;
        Ok(rec)
    }
}
