use num_bigint::BigInt;
use permlab::perm::{ln_bigint, permanent};
use permlab::{sample_symmetric, EntryDistribution, SeedSpec};
use serde_json::json;

use super::{mark_vacuous, new_record, run_trials, Trial};
use crate::config::ExperimentConfig;
use crate::error::{usage, CliError};
use crate::record::{ExperimentRecord, SeedAudit};
use crate::stats::{fmt_f64, fmt_opt, median, ratio};
use crate::svg::line_chart;

const MAX_N: usize = 24;
const BAND: (f64, f64) = (0.5, 1.1);
const SLACK: f64 = 0.05;

/// `ln|per|` and `ln|per| / (½ n ln n)`; the ratio is undefined at `n = 1`.
pub fn normalized_log(per: &BigInt, n: usize) -> (f64, Option<f64>) {
    let lg = ln_bigint(per);
    let scale = 0.5 * n as f64 * (n as f64).ln();
    (lg, (n >= 2).then(|| lg / scale))
}

/// `n = 2^k - 1`.
fn forced_nonzero(n: usize) -> bool {
    (n + 1).is_power_of_two()
}

/// Stream of sample `s` at dimension `n`.
fn stream(n: usize, s: u64) -> u64 {
    ((n as u64) << 32) | s
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let ns = cfg.params.usize_list_or("n-list", "8,12,16,20,24")?;
    if ns.is_empty() || ns.iter().any(|&n| n == 0 || n > MAX_N) {
        return Err(usage(format!(
            "n-list = {ns:?} must be non-empty with entries in 1..={MAX_N}"
        )));
    }
    let samples = cfg.trials;
    if samples >= 1 << 32 {
        return Err(usage("trials must stay below 2^32 per dimension"));
    }
    let dist = EntryDistribution::rademacher();
    let jobs: Vec<(usize, u64)> = ns
        .iter()
        .flat_map(|&n| (0..samples as u64).map(move |s| (n, s)))
        .collect();
    let out = run_trials(jobs.len(), |j| {
        let (n, s) = jobs[j as usize];
        let m = sample_symmetric(n, &dist, SeedSpec::new(cfg.root_seed, stream(n, s)))?;
        permanent(&m.to_matrix())
    })?;

    let mut rec = new_record(
        cfg,
        &[
            "n",
            "samples",
            "zeros",
            "zero_fraction",
            "median_log_abs_per",
            "normalized_log_per",
        ],
    );
    let mut traces = Vec::new();
    let mut points = Vec::new();
    let mut it = out.into_iter();
    for &n in &ns {
        let mut logs = Vec::with_capacity(samples);
        let mut norms = Vec::with_capacity(samples);
        let mut zeros = 0;
        for r in it.by_ref().take(samples) {
            match r {
                Trial::Done(per) => {
                    let (lg, nl) = normalized_log(&per, n);
                    zeros += usize::from(per == BigInt::from(0));
                    logs.push(lg);
                    norms.extend(nl);
                }
                Trial::Violated(msg) => rec.violations.push(msg),
            }
        }
        if zeros > 0 && forced_nonzero(n) {
            rec.violations.push(format!(
                "n = {n} = 2^k - 1 produced {zeros} zero permanents"
            ));
        }
        let med = median(&norms);
        if let Some(v) = med {
            points.push((n as f64, v));
        }
        rec.push_row(vec![
            n.to_string(),
            samples.to_string(),
            zeros.to_string(),
            ratio(zeros, samples),
            fmt_opt(median(&logs)),
            fmt_opt(med),
        ]);
        traces.push(json!({ "n": n, "normalized_log_per": norms.iter().map(|&v| fmt_f64(v)).collect::<Vec<_>>() }));
    }

    let in_band = points.iter().all(|&(_, v)| (BAND.0..=BAND.1).contains(&v));
    let monotone = points.windows(2).all(|w| w[1].1 >= w[0].1 - SLACK);
    if !points.is_empty() {
        rec.add_summary("median_in_band", in_band);
        rec.add_summary("monotone_within_slack", monotone);
        if !in_band {
            rec.warnings.push(format!(
                "a median normalized log lies outside [{}, {}]",
                BAND.0, BAND.1
            ));
        }
        if !monotone {
            rec.warnings.push(format!(
                "medians decrease by more than {SLACK} between dimensions"
            ));
        }
    }
    let forced: Vec<String> = ns
        .iter()
        .filter(|&&n| forced_nonzero(n))
        .map(|n| n.to_string())
        .collect();
    rec.add_summary("forced_nonzero_dimensions", forced.join(";"));
    mark_vacuous(&mut rec, samples);
    rec.traces = Some(json!(traces));
    rec.seed_audit = Some(SeedAudit {
        root_seed: cfg.root_seed,
        streams: "stream id = (n << 32) | sample".into(),
        generator: "ChaCha8, one keystream window per exposure step".into(),
    });
    if cfg.params.get("svg").is_some() {
        rec.chart = Some(line_chart(
            "median log|per M_n| / (n log n / 2)",
            "n",
            "normalized log|per|",
            &points,
        ));
    }
    Ok(rec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalization() {
        let (lg, nl) = normalized_log(&BigInt::from(1), 1);
        assert_eq!((lg, nl), (0.0, None));
        let (_, nl) = normalized_log(&BigInt::from(16), 4);
        // ln 16 / (2 ln 4) = 1
        assert!((nl.unwrap() - 1.0).abs() < 1e-12);
        assert_eq!(normalized_log(&BigInt::from(0), 5).0, f64::NEG_INFINITY);
        assert!(forced_nonzero(7) && forced_nonzero(15) && !forced_nonzero(8));
    }
}
