use permlab::endgame::{endgame_step_run, find_endgame_family};
use permlab::{sample_symmetric, EntryDistribution, SeedSpec};
use serde_json::{json, Value};

use super::{flag, new_record, run_trials, success_summary, Trial};
use crate::config::ExperimentConfig;
use crate::error::{usage, CliError};
use crate::record::ExperimentRecord;
use crate::stats::fmt_f64;

const MAX_DIM: usize = 24;

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let p = &cfg.params;
    let n = p.usize_or("n", 12)?;
    let l = p.usize_or("l", 1)?;
    let m = p.usize_or("m", 4)?;
    let lambda = p.threshold_or("lambda", "1000")?;
    if l == 0 || m == 0 || 2 * l * m > n {
        return Err(usage(format!(
            "need l, m ≥ 1 and 2·l·m ≤ n, got l = {l}, m = {m}, n = {n}"
        )));
    }
    if n + 1 > MAX_DIM {
        return Err(usage(format!(
            "n = {n}: the extended matrix must stay within {MAX_DIM}"
        )));
    }
    let dist = EntryDistribution::rademacher();
    let root = cfg.root_seed;
    let results = run_trials(cfg.trials, |t| {
        let seed = SeedSpec::new(root, t);
        let mat = sample_symmetric(n, &dist, seed)?;
        let Some(fam) = find_endgame_family(&mat.to_matrix(), l, m, &lambda)? else {
            return Ok(None);
        };
        let out = endgame_step_run(&mat, &fam, seed)?;
        let verified = match &out.family {
            Some(f) => {
                f.verify(&out.matrix.to_matrix())?;
                true
            }
            None => false,
        };
        Ok(Some((out.summary, verified)))
    })?;

    let mut rec = new_record(
        cfg,
        &[
            "trial",
            "status",
            "m",
            "easy",
            "short",
            "interesting",
            "bad",
            "qualifying",
            "needed",
            "success",
            "family_verified",
        ],
    );
    let (mut ran, mut successes) = (0, 0);
    let mut traces = Vec::new();
    for (t, r) in results.into_iter().enumerate() {
        match r {
            Trial::Done(None) => {
                let mut row = vec![t.to_string(), "no-family".into(), m.to_string()];
                row.extend(std::iter::repeat_n(String::new(), 6));
                row.extend([flag(false), flag(false)]);
                rec.push_row(row);
            }
            Trial::Done(Some((s, verified))) => {
                ran += 1;
                successes += usize::from(s.success);
                rec.push_row(vec![
                    t.to_string(),
                    "ok".into(),
                    s.m.to_string(),
                    s.easy.to_string(),
                    s.short.to_string(),
                    s.interesting.to_string(),
                    s.bad.to_string(),
                    s.qualifying.to_string(),
                    s.needed.to_string(),
                    flag(s.success),
                    flag(verified),
                ]);
                traces.push(json!({ "trial": t, "summary": s }));
            }
            Trial::Violated(msg) => rec.violations.push(format!("trial {t}: {msg}")),
        }
    }
    rec.add_summary("with_family", ran);
    success_summary(&mut rec, successes, ran);
    rec.add_summary(
        "reference_rate",
        fmt_f64(1.0 - (m as f64).powf(-1.0 / 24.0)),
    );
    rec.traces = Some(Value::Array(traces));
    Ok(rec)
}
