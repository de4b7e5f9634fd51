use std::collections::BTreeMap;
use std::fs;

use crate::config::{ExperimentConfig, Subcommand};
use crate::error::{usage, CliError};
use crate::record::ExperimentRecord;
use crate::stats::{binomial_ci, fmt_f64, fmt_opt, median, ratio};
use crate::svg::line_chart;

fn summed(records: &[ExperimentRecord], key: &str) -> Option<usize> {
    let vals: Vec<usize> = records
        .iter()
        .filter_map(|r| r.summary_value(key)?.parse().ok())
        .collect();
    (!vals.is_empty()).then(|| vals.iter().sum())
}

/// Smallest value of a rational-valued summary key, compared as `f64`.
fn min_rational(records: &[ExperimentRecord], key: &str) -> Option<String> {
    let as_f64 = |s: &str| match s.split_once('/') {
        Some((p, q)) => p
            .parse::<f64>()
            .ok()
            .zip(q.parse::<f64>().ok())
            .map(|(p, q)| p / q),
        None => s.parse().ok(),
    };
    records
        .iter()
        .filter_map(|r| r.summary_value(key))
        .filter_map(|s| as_f64(s).map(|v| (v, s)))
        .min_by(|a, b| a.0.total_cmp(&b.0))
        .map(|(_, s)| s.to_string())
}

fn merge_magnitude(records: &[ExperimentRecord]) -> Result<ExperimentRecord, CliError> {
    let cols = [
        "n",
        "samples",
        "zeros",
        "zero_fraction",
        "median_log_abs_per",
        "normalized_log_per",
    ];
    let mut per_n: BTreeMap<usize, (usize, usize, Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for r in records {
        let idx: Vec<usize> = cols
            .iter()
            .map(|c| {
                r.column(c)
                    .ok_or_else(|| usage(format!("magnitude record lacks column {c}")))
            })
            .collect::<Result<_, _>>()?;
        for row in &r.rows {
            let num = |i: usize| {
                row[idx[i]]
                    .parse::<usize>()
                    .map_err(|_| usage(format!("bad value {}", row[idx[i]])))
            };
            let e = per_n.entry(num(0)?).or_default();
            e.0 += num(1)?;
            e.1 += num(2)?;
            e.2.extend(row[idx[4]].parse::<f64>().ok());
            e.3.extend(row[idx[5]].parse::<f64>().ok());
        }
    }
    let mut out = ExperimentRecord::new(Subcommand::MagnitudeSweep, Vec::new(), &cols);
    for (n, (samples, zeros, logs, norms)) in per_n {
        out.push_row(vec![
            n.to_string(),
            samples.to_string(),
            zeros.to_string(),
            ratio(zeros, samples),
            fmt_opt(median(&logs)),
            fmt_opt(median(&norms)),
        ]);
    }
    Ok(out)
}

fn concatenate(records: &[ExperimentRecord]) -> Result<ExperimentRecord, CliError> {
    let columns = &records[0].columns;
    if records.iter().any(|r| &r.columns != columns) {
        return Err(usage(
            "records of the same subcommand have different columns",
        ));
    }
    let mut cols = vec!["record"];
    cols.extend(columns.iter().map(String::as_str));
    let mut out = ExperimentRecord::new(records[0].subcommand, Vec::new(), &cols);
    for (i, r) in records.iter().enumerate() {
        for row in &r.rows {
            let mut v = vec![i.to_string()];
            v.extend(row.iter().cloned());
            out.push_row(v);
        }
    }
    Ok(out)
}

/// Merge records of one subcommand. A single record passes through
/// unchanged apart from the optional chart.
pub fn report_summary(
    records: &[ExperimentRecord],
    svg: bool,
) -> Result<ExperimentRecord, CliError> {
    let first = records
        .first()
        .ok_or_else(|| usage("report needs at least one input"))?;
    if records.iter().any(|r| r.subcommand != first.subcommand) {
        return Err(usage("cannot merge records of different subcommands"));
    }
    let mut out = if records.len() == 1 {
        first.clone()
    } else {
        let mut out = match first.subcommand {
            Subcommand::MagnitudeSweep => merge_magnitude(records)?,
            _ => concatenate(records)?,
        };
        out.add_summary("records", records.len());
        if let (Some(s), Some(t)) = (summed(records, "successes"), summed(records, "trials")) {
            out.add_summary("successes", s);
            out.add_summary("trials", t);
            if t == 0 {
                out.add_summary("vacuous", "true");
            } else {
                out.add_summary("success_rate", ratio(s, t));
                if let Some((lo, hi)) = binomial_ci(s, t, 0.05) {
                    out.add_summary("ci95_low", fmt_f64(lo));
                    out.add_summary("ci95_high", fmt_f64(hi));
                }
            }
        }
        if let Some(m) = min_rational(records, "min_margin") {
            out.add_summary("min_margin", m);
        }
        for (i, r) in records.iter().enumerate() {
            out.warnings
                .extend(r.warnings.iter().map(|w| format!("record {i}: {w}")));
            out.violations
                .extend(r.violations.iter().map(|v| format!("record {i}: {v}")));
        }
        out
    };
    if svg && out.subcommand == Subcommand::MagnitudeSweep {
        let (Some(n), Some(v)) = (out.column("n"), out.column("normalized_log_per")) else {
            return Err(usage("magnitude record lacks n or normalized_log_per"));
        };
        let points: Vec<(f64, f64)> = out
            .rows
            .iter()
            .filter_map(|r| Some((r[n].parse().ok()?, r[v].parse().ok()?)))
            .collect();
        out.chart = Some(line_chart(
            "median log|per M_n| / (n log n / 2)",
            "n",
            "normalized log|per|",
            &points,
        ));
    }
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let inputs = cfg.params.string_list("inputs");
    if inputs.is_empty() {
        return Err(usage("report needs inputs=<file>[,<file>...]"));
    }
    let records = inputs
        .iter()
        .map(|path| {
            let text =
                fs::read_to_string(path).map_err(|e| CliError::Io(format!("{path}: {e}")))?;
            ExperimentRecord::from_csv(&text).map_err(|e| usage(format!("{path}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut out = report_summary(&records, cfg.params.get("svg").is_some())?;
    if records.len() > 1 {
        out.config = cfg.params.snapshot();
    }
    Ok(out)
}
