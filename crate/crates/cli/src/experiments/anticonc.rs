use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use permlab::anticonc::{
    elo_tail, fact_linear_nondegenerate_check, fact_quadratic_nondegenerate_check,
    QuadraticPolynomial, EXACT_MAX_VARS,
};
use permlab::perm::HeavinessThreshold;
use permlab::SeedSpec;
use rand::Rng;

use super::{flag, mark_vacuous, new_record, run_trials, Trial};
use crate::config::ExperimentConfig;
use crate::error::{usage, CliError};
use crate::record::ExperimentRecord;
use crate::stats::{fmt_f64, fmt_rational};

/// Quadratic instances stay small; their enumeration is dense.
const QUADRATIC_MAX_VARS: usize = 12;

struct Row {
    check: &'static str,
    vars: usize,
    m: Option<usize>,
    t: Option<BigRational>,
    exact: BigRational,
    bound: BigRational,
    simple: Option<f64>,
    holds: bool,
}

fn largest(coeffs: impl Iterator<Item = BigInt>) -> BigInt {
    coeffs.map(|c| c.abs()).max().unwrap_or_else(BigInt::zero)
}

fn instance(
    seed: SeedSpec,
    vars: usize,
    coef_max: i64,
    r: &HeavinessThreshold,
    ts: &[BigRational],
) -> permlab::Result<Vec<Row>> {
    let mut rng = seed.rng_for_step(0);
    let mut out = Vec::new();

    let n = rng.gen_range(1..=vars);
    let mut coeffs: Vec<i64> = (0..n)
        .map(|_| rng.gen_range(-coef_max..=coef_max))
        .collect();
    let constant = rng.gen_range(-coef_max..=coef_max);
    if !coeffs.iter().any(|&c| r.admits(&c.into())) {
        coeffs[0] = r.min_admitted().try_into().unwrap_or(coef_max);
    }
    let f = QuadraticPolynomial::linear_from(constant, &coeffs);
    for t in ts {
        let e = elo_tail(&f, r, t)?;
        out.push(Row {
            check: "elo-chain",
            vars: n,
            m: Some(e.m),
            t: Some(t.clone()),
            holds: e.holds(),
            exact: e.exact,
            bound: e.binomial,
            simple: Some(e.simple),
        });
    }

    let top = largest(
        f.linear_terms()
            .map(|(_, c)| c.clone())
            .chain([f.constant().clone()]),
    );
    if !top.is_zero() {
        let c = fact_linear_nondegenerate_check(&f, &HeavinessThreshold::from_integer(top)?)?;
        out.push(Row {
            check: "linear-nondegenerate",
            vars: n,
            m: None,
            t: None,
            holds: c.holds,
            exact: c.probability,
            bound: c.bound,
            simple: None,
        });
    }

    let nq = rng.gen_range(2..=vars.clamp(2, QUADRATIC_MAX_VARS));
    let mut g = QuadraticPolynomial::new(nq);
    g.add_constant(&rng.gen_range(-coef_max..=coef_max).into());
    for i in 1..=nq {
        g.add_linear(i, &rng.gen_range(-coef_max..=coef_max).into())?;
        for j in i + 1..=nq {
            if rng.gen_bool(0.4) {
                g.add_quadratic(i, j, &rng.gen_range(-coef_max..=coef_max).into())?;
            }
        }
    }
    if g.quadratic_terms().next().is_none() {
        g.add_quadratic(1, 2, &BigInt::from(1))?;
    }
    let top = largest(g.quadratic_terms().map(|(_, c)| c.clone()));
    let c = fact_quadratic_nondegenerate_check(&g, &HeavinessThreshold::from_integer(top)?)?;
    out.push(Row {
        check: "quadratic-nondegenerate",
        vars: nq,
        m: None,
        t: None,
        holds: c.holds,
        exact: c.probability,
        bound: c.bound,
        simple: None,
    });
    Ok(out)
}

pub fn run(cfg: &ExperimentConfig) -> Result<ExperimentRecord, CliError> {
    let p = &cfg.params;
    let vars = p.usize_or("vars", 20)?;
    if vars == 0 || vars > EXACT_MAX_VARS {
        return Err(usage(format!(
            "vars = {vars} must lie in 1..={EXACT_MAX_VARS}"
        )));
    }
    let coef_max = p.usize_or("coef-max", 6)?;
    if coef_max == 0 || coef_max > 1 << 20 {
        return Err(usage(format!("coef-max = {coef_max} must lie in 1..=2^20")));
    }
    let coef_max = coef_max as i64;
    let r = p.threshold_or("r", "1")?;
    if r.min_admitted() > BigInt::from(coef_max) {
        return Err(usage(format!(
            "r = {r} exceeds coef-max = {coef_max}; no coefficient could reach it"
        )));
    }
    let ts = p.rational_list_or("t-list", "1,2,4")?;
    if ts.is_empty() || ts.iter().any(|t| *t < BigRational::from_integer(1.into())) {
        return Err(usage("every t in t-list must be at least 1"));
    }

    let out = run_trials(cfg.trials, |i| {
        instance(SeedSpec::new(cfg.root_seed, i), vars, coef_max, &r, &ts)
    })?;
    let mut rec = new_record(
        cfg,
        &[
            "instance",
            "check",
            "vars",
            "m",
            "t",
            "exact_prob",
            "bound",
            "margin",
            "simple_bound",
            "holds",
        ],
    );
    let mut counts = [0usize; 2];
    let mut min_margin: Option<BigRational> = None;
    for (i, r) in out.into_iter().enumerate() {
        let rows = match r {
            Trial::Done(rows) => rows,
            Trial::Violated(msg) => {
                rec.violations.push(msg);
                continue;
            }
        };
        for row in rows {
            let margin = &row.bound - &row.exact;
            counts[usize::from(row.holds)] += 1;
            if !row.holds {
                rec.violations
                    .push(format!("instance {i}: {} fails", row.check));
            }
            if min_margin.as_ref().is_none_or(|m| margin < *m) {
                min_margin = Some(margin.clone());
            }
            rec.push_row(vec![
                i.to_string(),
                row.check.into(),
                row.vars.to_string(),
                row.m.map(|m| m.to_string()).unwrap_or_default(),
                row.t.as_ref().map(fmt_rational).unwrap_or_default(),
                fmt_rational(&row.exact),
                fmt_rational(&row.bound),
                fmt_rational(&margin),
                row.simple.map(fmt_f64).unwrap_or_default(),
                flag(row.holds),
            ]);
        }
    }
    rec.add_summary("checks", counts[0] + counts[1]);
    rec.add_summary("failures", counts[0]);
    if let Some(m) = min_margin {
        rec.add_summary("min_margin", fmt_rational(&m));
    }
    mark_vacuous(&mut rec, cfg.trials);
    Ok(rec)
}
