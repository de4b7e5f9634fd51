use num_rational::BigRational;
use num_traits::One;
use permlab::growth::{
    first_heavy_start, grow_single_minor_run, iterative_cover_run_for, iterative_growth_run_for,
    weak_growth_run, CoverOutcome, GrowthParams, PipelineSchedule, DEFAULT_FAMILY_CAP,
};
use permlab::perm::HeavinessThreshold;
use permlab::{sample_symmetric, EntryDistribution, IndexSet, LabError, SeedSpec};
use serde_json::{json, Value};

use super::{flag, new_record, run_trials, success_summary, Trial};
use crate::config::{ExperimentConfig, Params};
use crate::error::{usage, CliError};
use crate::record::ExperimentRecord;

const MAX_DIM: usize = 24;

const COLUMNS: &[&str] = &[
    "trial",
    "mode",
    "status",
    "start_dim",
    "final_dim",
    "steps",
    "failures",
    "progress",
    "final_q",
    "detail",
    "success",
];

struct Outcome {
    status: &'static str,
    start_dim: usize,
    final_dim: usize,
    steps: usize,
    failures: Option<usize>,
    progress: Option<usize>,
    final_q: Option<usize>,
    detail: String,
    success: bool,
    trace: Value,
}

impl Outcome {
    fn no_start(n: usize) -> Self {
        Outcome {
            status: "no-start",
            start_dim: n,
            final_dim: n,
            steps: 0,
            failures: None,
            progress: None,
            final_q: None,
            detail: String::new(),
            success: false,
            trace: Value::Null,
        }
    }

    fn from_cover(out: &CoverOutcome) -> permlab::Result<Self> {
        out.trace.check()?;
        let t = &out.trace;
        Ok(Outcome {
            status: if t.succeeded() { "ok" } else { "failed" },
            start_dim: t.n,
            final_dim: out.matrix.n(),
            steps: t.steps.len(),
            failures: Some(t.failures()),
            progress: Some(t.progress_steps()),
            final_q: t.final_q(),
            detail: out
                .witness
                .as_ref()
                .map(|w| w.cols.to_string())
                .unwrap_or_default(),
            success: t.succeeded(),
            trace: json!({ "q_start": t.q_start, "q": t.q_trajectory() }),
        })
    }
}

fn opt(v: Option<usize>) -> String {
    v.map(|v| v.to_string()).unwrap_or_default()
}

fn bad(e: LabError) -> CliError {
    match e {
        LabError::InvalidParams(msg) => usage(msg),
        other => CliError::Lab(other),
    }
}

fn index_set(p: &Params, key: &str, n: usize, default: Vec<usize>) -> Result<IndexSet, CliError> {
    let items = match p.get(key) {
        Some(_) => p.usize_list_or(key, "")?,
        None => default,
    };
    if items.iter().any(|&i| i == 0 || i > n) {
        return Err(usage(format!("{key} = {items:?} must lie in 1..={n}")));
    }
    IndexSet::from_indices(n, items).map_err(bad)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let p = &cfg.params;
    let mode = p.choice_or("mode", &["weak", "cover", "growth", "pipeline"], "weak")?;
    let dist = EntryDistribution::rademacher();
    let root = cfg.root_seed;
    let lambda = p.threshold_or("lambda", "1")?;
    let results = match mode.as_str() {
        "weak" => {
            let n = p.usize_or("n", 16)?;
            let r = p.usize_or("r", 4)?;
            if n > MAX_DIM || r == 0 || r >= n {
                return Err(usage(format!(
                    "need 1 ≤ r < n ≤ {MAX_DIM}, got r = {r}, n = {n}"
                )));
            }
            let mut params = GrowthParams::weak(
                n,
                r,
                p.rational_or("delta", "1/4")?,
                p.rational_or("k", "2")?,
            );
            params.family_cap = p.usize_or("family-cap", DEFAULT_FAMILY_CAP)?;
            if params.delta <= BigRational::from_integer(0.into())
                || &params.delta + &params.delta >= BigRational::one()
            {
                return Err(usage("delta must lie in (0, 1/2)"));
            }
            if params.big_k <= BigRational::one() {
                return Err(usage("k must exceed 1"));
            }
            run_trials(cfg.trials, |t| {
                let out = weak_growth_run(&params, SeedSpec::new(root, t))?;
                out.trace.check()?;
                let tr = &out.trace;
                let found = out.family.as_ref().is_some_and(|f| !f.is_empty());
                let success = tr.aborted_at.is_none() && found;
                let c = tr.case_counts();
                Ok(Outcome {
                    status: if tr.aborted_at.is_some() {
                        "aborted"
                    } else if found {
                        "ok"
                    } else {
                        "empty"
                    },
                    start_dim: r,
                    final_dim: out.matrix.n(),
                    steps: tr.steps.len(),
                    failures: None,
                    progress: None,
                    final_q: None,
                    detail: format!("cases i={} ii={} iii={} iv={}", c[0], c[1], c[2], c[3]),
                    success,
                    trace: json!({
                        "labels": tr.labels(),
                        "w": tr.w.iter().map(|w| w.to_string()).collect::<Vec<_>>(),
                        "final_n": tr.final_n.to_string(),
                        "final_lambda": tr.final_lambda.to_string(),
                        "family_truncated": out.family_truncated,
                    }),
                })
            })?
        }
        "cover" => {
            let n = p.usize_or("n", 12)?;
            let s = p.usize_or("s", 3)?;
            let steps = p.usize_or("steps", 3 * s)?;
            if s == 0 || s >= n || n + steps > MAX_DIM {
                return Err(usage(format!("need 1 ≤ s < n and n + steps ≤ {MAX_DIM}, got n = {n}, s = {s}, steps = {steps}")));
            }
            run_trials(cfg.trials, |t| {
                let seed = SeedSpec::new(root, t);
                let m = sample_symmetric(n, &dist, seed)?;
                let Some(b) = first_heavy_start(&m, s, 0, &lambda)? else {
                    return Ok(Outcome::no_start(n));
                };
                Outcome::from_cover(&iterative_cover_run_for(&m, &b, s, steps, &lambda, seed)?)
            })?
        }
        "growth" => {
            let n = p.usize_or("n", 6)?;
            let s = p.usize_or("s", 3)?;
            let tt = p.usize_or("t", 2)?;
            let steps = p.usize_or("steps", 5 * s)?;
            if tt < 2 || tt >= s || s > n || n + steps > MAX_DIM {
                return Err(usage(format!(
                    "need 2 ≤ t < s ≤ n and n + steps ≤ {MAX_DIM}, got n = {n}, s = {s}, t = {tt}, steps = {steps}"
                )));
            }
            run_trials(cfg.trials, |t| {
                let seed = SeedSpec::new(root, t);
                let m = sample_symmetric(n, &dist, seed)?;
                let Some(b) = first_heavy_start(&m, s, s, &lambda)? else {
                    return Ok(Outcome::no_start(n));
                };
                Outcome::from_cover(&iterative_growth_run_for(
                    &m, &b, s, tt, steps, &lambda, seed,
                )?)
            })?
        }
        _ => {
            let n = p.usize_or("n", 20)?;
            let l = p.usize_or("l", 2)?;
            let r = p.usize_or("r", 5)?;
            let mut schedule = PipelineSchedule::lemma_lengths(
                n,
                l,
                r,
                p.rational_or("delta", "1/4")?,
                p.rational_or("k", "2")?,
            );
            schedule.family_cap = p.usize_or("family-cap", DEFAULT_FAMILY_CAP)?;
            let js = [p.opt_usize("j1")?, p.opt_usize("j2")?, p.opt_usize("j3")?];
            if js.iter().any(Option::is_some) {
                let (j1, j2, j3) = (
                    js[0].unwrap_or(schedule.j1),
                    js[1].unwrap_or(schedule.j2),
                    js[2].unwrap_or(schedule.j3),
                );
                schedule = schedule.with_steps(j1, j2, j3);
            }
            schedule.validate().map_err(bad)?;
            let x = index_set(p, "x", n, (1..=l).collect())?;
            let y = index_set(p, "y", n, (n + 1 - 3 * l..=n).collect())?;
            if x.len() != l || y.len() != 3 * l || !x.is_disjoint(&y) {
                return Err(usage(format!(
                    "need disjoint x, y with |x| = {l}, |y| = {}; got x = {x}, y = {y}",
                    3 * l
                )));
            }
            run_trials(cfg.trials, |t| {
                let out = grow_single_minor_run(&x, &y, &schedule, SeedSpec::new(root, t))?;
                out.check_wiring()?;
                let last = out.stages.last();
                Ok(Outcome {
                    status: if out.succeeded() { "ok" } else { "failed" },
                    start_dim: out.stages.first().map_or(0, |s| s.dim_in),
                    final_dim: last.map_or(0, |s| s.dim_out),
                    steps: out.stages.iter().map(|s| s.q_trajectory.len()).sum(),
                    failures: Some(out.stages.iter().map(|s| s.failures).sum()),
                    progress: Some(out.stages.iter().map(|s| s.progress_steps).sum()),
                    final_q: last.and_then(|s| s.q_trajectory.last().copied().flatten()),
                    detail: match (&out.failed_stage, &out.b) {
                        (Some(st), _) => format!("failed at {st}"),
                        (None, Some(b)) => b.to_string(),
                        _ => String::new(),
                    },
                    success: out.succeeded(),
                    trace: json!({
                        "stages": out.stages,
                        "failed_stage": out.failed_stage,
                        "composed": out.composed.as_ref().map(HeavinessThreshold::to_string),
                    }),
                })
            })?
        }
    };

    let mut rec = new_record(cfg, COLUMNS);
    let mut traces = Vec::new();
    let mut successes = 0;
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Trial::Done(o) => {
                successes += usize::from(o.success);
                rec.push_row(vec![
                    t.to_string(),
                    mode.clone(),
                    o.status.into(),
                    o.start_dim.to_string(),
                    o.final_dim.to_string(),
                    o.steps.to_string(),
                    opt(o.failures),
                    opt(o.progress),
                    opt(o.final_q),
                    o.detail,
                    flag(o.success),
                ]);
                traces.push(json!({ "trial": t, "trace": o.trace }));
            }
            Trial::Violated(msg) => rec.violations.push(format!("trial {t}: {msg}")),
        }
    }
    success_summary(&mut rec, successes, cfg.trials);
    rec.traces = Some(Value::Array(traces));
    Ok(rec)
}
