//! One runner per subcommand. Trial `t` of a run owns the stream
//! `SeedSpec::new(seed, t)`; rows come back in trial order whatever the
//! thread count.

mod anticonc;
mod endgame;
mod grow;
mod magnitude;
mod moments;
mod permanent;
mod report;

use std::time::Instant;

use permlab::LabError;
use rayon::prelude::*;

use crate::config::{ExperimentConfig, Subcommand};
use crate::error::CliError;
use crate::record::{ExperimentRecord, SeedAudit};
use crate::stats::{binomial_ci, fmt_f64, ratio};

pub use magnitude::normalized_log;
pub use report::report_summary;

pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Io(format!("thread pool: {e}")))?;
    let mut rec = pool.install(|| match cfg.subcommand {
        Subcommand::Permanent => permanent::run(cfg),
        Subcommand::Moments => moments::run(cfg),
        Subcommand::Anticonc => anticonc::run(cfg),
        Subcommand::Grow => grow::run(cfg),
        Subcommand::Endgame => endgame::run(cfg),
        Subcommand::MagnitudeSweep => magnitude::run(cfg),
        Subcommand::Report => report::run(cfg),
    })?;
    if rec.seed_audit.is_none() && cfg.subcommand != Subcommand::Report {
        rec.seed_audit = Some(SeedAudit {
            root_seed: cfg.root_seed,
            streams: "stream id = trial index".into(),
            generator: "ChaCha8, one keystream window per exposure step".into(),
        });
    }
    rec.wall_clock_secs = start.elapsed().as_secs_f64();
    Ok(rec)
}

/// Outcome of one trial once assert-always failures are separated out.
pub(crate) enum Trial<T> {
    Done(T),
    Violated(String),
}

/// Run `f` on trials `0..n` in parallel, in trial order. Invariant
/// failures become [`Trial::Violated`]; any other error aborts the run.
pub(crate) fn run_trials<T, F>(n: usize, f: F) -> Result<Vec<Trial<T>>, CliError>
where
    T: Send,
    F: Fn(u64) -> permlab::Result<T> + Sync + Send,
{
    let raw: Vec<permlab::Result<T>> = (0..n as u64).into_par_iter().map(f).collect();
    raw.into_iter()
        .map(|r| match r {
            Ok(v) => Ok(Trial::Done(v)),
            Err(LabError::Invariant(msg)) => Ok(Trial::Violated(msg)),
            Err(e) => Err(CliError::Lab(e)),
        })
        .collect()
}

pub(crate) fn new_record(cfg: &ExperimentConfig, columns: &[&str]) -> ExperimentRecord {
    ExperimentRecord::new(cfg.subcommand, cfg.params.snapshot(), columns)
}

/// Count, exact rate and 95 % Clopper–Pearson interval.
pub(crate) fn success_summary(rec: &mut ExperimentRecord, successes: usize, trials: usize) {
    rec.add_summary("successes", successes);
    rec.add_summary("trials", trials);
    if trials == 0 {
        rec.add_summary("vacuous", "true");
        return;
    }
    rec.add_summary("success_rate", ratio(successes, trials));
    if let Some((lo, hi)) = binomial_ci(successes, trials, 0.05) {
        rec.add_summary("ci95_low", fmt_f64(lo));
        rec.add_summary("ci95_high", fmt_f64(hi));
    }
}

pub(crate) fn mark_vacuous(rec: &mut ExperimentRecord, trials: usize) {
    if trials == 0 {
        rec.add_summary("vacuous", "true");
    }
}

pub(crate) fn flag(b: bool) -> String {
    if b { "true" } else { "false" }.into()
}
