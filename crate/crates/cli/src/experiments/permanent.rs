use permlab::perm::{permanent_glynn_i128, permanent_naive, permanent_ryser, NAIVE_MAX};
use permlab::{sample_symmetric, EntryDistribution, SeedSpec};

use super::{flag, mark_vacuous, new_record, run_trials, Trial};
use crate::config::ExperimentConfig;
use crate::error::{usage, CliError};
use crate::experiments::normalized_log;
use crate::record::ExperimentRecord;
use crate::stats::{fmt_f64, fmt_opt, median};

const CROSS_CHECK_MAX: usize = 9;
/// Largest sampled dimension.
const SAMPLED_MAX: usize = 24;

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let p = &cfg.params;
    let n = p.usize_or("n", 12)?;
    let method = p.choice_or("method", &["ryser", "glynn", "naive"], "ryser")?;
    let limit = match method.as_str() {
        "naive" => NAIVE_MAX,
        _ => SAMPLED_MAX,
    };
    if n == 0 || n > limit {
        return Err(usage(format!(
            "n = {n} must lie in 1..={limit} for method {method}"
        )));
    }
    let trials = cfg.trials;
    let dist = EntryDistribution::rademacher();
    let out = run_trials(trials, |t| {
        let m = sample_symmetric(n, &dist, SeedSpec::new(cfg.root_seed, t))?.to_matrix();
        let per = match method.as_str() {
            "naive" => permanent_naive(&m)?,
            "glynn" => permanent_glynn_i128(&m)?.into(),
            _ => permanent_ryser(&m)?,
        };
        let checked = n <= CROSS_CHECK_MAX;
        if checked && per != permanent_naive(&m)? {
            return Err(permlab::LabError::Invariant(format!(
                "trial {t}: {method} disagrees with the naive sum"
            )));
        }
        Ok((per, checked))
    })?;

    let mut rec = new_record(
        cfg,
        &[
            "trial",
            "n",
            "method",
            "permanent",
            "log_abs_per",
            "normalized_log_per",
            "cross_checked",
        ],
    );
    let mut norm = Vec::new();
    let mut zeros = 0;
    for (t, r) in out.into_iter().enumerate() {
        match r {
            Trial::Done((per, checked)) => {
                let (lg, nl) = normalized_log(&per, n);
                zeros += usize::from(lg.is_infinite());
                norm.extend(nl);
                rec.push_row(vec![
                    t.to_string(),
                    n.to_string(),
                    method.clone(),
                    per.to_string(),
                    fmt_f64(lg),
                    fmt_opt(nl),
                    flag(checked),
                ]);
            }
            Trial::Violated(msg) => rec.violations.push(msg),
        }
    }
    rec.add_summary("zeros", zeros);
    rec.add_summary("median_normalized_log_per", fmt_opt(median(&norm)));
    mark_vacuous(&mut rec, trials);
    Ok(rec)
}
