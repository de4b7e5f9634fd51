use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::anticonc::{
    greedy_vertex_cover, matching_number, CoefficientGraph, QuadraticPolynomial,
};
use crate::error::{contract, invariant, Result};
use crate::index_set::IndexSet;
use crate::perm::HeavinessThreshold;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Label {
    Easy,
    Short,
    Interesting,
}

/// Diagnostics for one index `ℓ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexRecord {
    /// `P_ℓ` in the variables `x_i`, `i ∈ I`.
    pub poly: QuadraticPolynomial,
    pub edges: usize,
    pub matching: usize,
    /// Vertex cover `S_ℓ` of `G_ℓ` (non-easy only).
    pub cover: Option<IndexSet>,
    pub label: Option<Label>,
    /// Good variables in a term of `P_ℓ` with coefficient at least `σ`.
    pub large_good_vars: usize,
    /// `P*_ℓ` (interesting only).
    pub p_star: Option<QuadraticPolynomial>,
    pub t_ell: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EndgameState {
    pub n: usize,
    pub lambda: HeavinessThreshold,
    /// `λ/(4n²)`.
    pub sigma: HeavinessThreshold,
    /// `λ/(4n⁴)`.
    pub tau: HeavinessThreshold,
    pub i_set: IndexSet,
    pub records: Vec<IndexRecord>,
    pub bad: IndexSet,
    pub good: IndexSet,
}

/// `count ≥ m^(1/k)`.
pub fn at_least_root(count: usize, m: usize, k: u32) -> bool {
    BigInt::from(count).pow(k) >= BigInt::from(m)
}

/// `count ≤ c · m^(p/q)`.
pub fn at_most_power(count: usize, c: u64, m: usize, p: u32, q: u32) -> bool {
    BigInt::from(count).pow(q) <= BigInt::from(c).pow(q) * BigInt::from(m).pow(p)
}

impl EndgameState {
    pub fn new(
        n: usize,
        lambda: HeavinessThreshold,
        polys: Vec<QuadraticPolynomial>,
        i_set: IndexSet,
    ) -> Result<Self> {
        let nn = BigInt::from(n);
        let four = BigInt::from(4);
        let sigma = lambda.scaled(&BigRational::new(1.into(), &four * Pow::pow(&nn, 2u32)))?;
        let tau = lambda.scaled(&BigRational::new(1.into(), &four * Pow::pow(&nn, 4u32)))?;
        let records = polys
            .into_iter()
            .map(|poly| IndexRecord {
                poly,
                edges: 0,
                matching: 0,
                cover: None,
                label: None,
                large_good_vars: 0,
                p_star: None,
                t_ell: None,
            })
            .collect();
        Ok(EndgameState {
            n,
            lambda,
            sigma,
            tau,
            i_set,
            records,
            bad: IndexSet::empty(i_set.ground_size())?,
            good: i_set,
        })
    }

    pub fn m(&self) -> usize {
        self.records.len()
    }

    pub fn count(&self, label: Label) -> usize {
        self.records
            .iter()
            .filter(|r| r.label == Some(label))
            .count()
    }

    /// `T_ℓ` for an interesting `ℓ` at the given values of its cover variables.
    pub fn t_ell(&self, ell: usize, values: &BTreeMap<usize, i64>) -> Result<usize> {
        let rec = self
            .records
            .get(ell)
            .ok_or_else(|| contract(format!("no index {ell}")))?;
        match (&rec.p_star, &rec.cover) {
            (Some(p), Some(s)) => t_ell_statistics(p, s, values, &self.sigma),
            _ => Err(contract(format!("index {ell} is not interesting"))),
        }
    }
}

/// Substitute the `S_ℓ` variables into `P*_ℓ` and count the remaining
/// degree-1 coefficients of absolute value at least `σ`.
pub fn t_ell_statistics(
    p_star: &QuadraticPolynomial,
    s_ell: &IndexSet,
    values: &BTreeMap<usize, i64>,
    sigma: &HeavinessThreshold,
) -> Result<usize> {
    let mut sub = BTreeMap::new();
    for i in s_ell.iter() {
        let v = *values
            .get(&i)
            .ok_or_else(|| contract(format!("no value for x{i}")))?;
        sub.insert(i, v);
    }
    let q = p_star.substitute(&sub)?;
    if !q.is_linear() {
        return Err(invariant(
            "P*_ℓ is not linear once its cover variables are fixed",
        ));
    }
    Ok(q.linear_terms().filter(|(_, c)| sigma.admits(c)).count())
}

/// Label every index easy, short or interesting, with `x` the realised
/// row used to fix the bad variables.
pub fn classify_indices(state: &mut EndgameState, x: &[i64]) -> Result<()> {
    let m = state.m();
    let n = state.n;
    let tau = state.tau.clone();
    let sigma = state.sigma.clone();
    for rec in state.records.iter_mut() {
        let g = CoefficientGraph::from_polynomial(&rec.poly, &tau);
        rec.edges = g.edges().len();
        rec.matching = matching_number(&g);
        if at_least_root(rec.matching, m, 6) {
            rec.label = Some(Label::Easy);
            continue;
        }
        let s = greedy_vertex_cover(&g);
        if g.edges()
            .iter()
            .any(|&(i, j)| !s.contains(i) && !s.contains(j))
        {
            return Err(invariant("greedy cover misses an edge"));
        }
        if s.len() > 2 * rec.matching || !at_most_power(s.len(), 2, m, 1, 6) {
            return Err(invariant(format!(
                "|S_ℓ| = {} exceeds 2ν = {}",
                s.len(),
                2 * rec.matching
            )));
        }
        rec.cover = Some(s);
        rec.label = None;
    }

    let mut hits: BTreeMap<usize, usize> = BTreeMap::new();
    for s in state.records.iter().filter_map(|r| r.cover.as_ref()) {
        for i in s.iter() {
            *hits.entry(i).or_default() += 1;
        }
    }
    let bad = IndexSet::from_indices(
        state.i_set.ground_size(),
        hits.iter()
            .filter(|(_, &c)| at_least_root(c, m, 3))
            .map(|(&i, _)| i),
    )?;
    if !at_most_power(bad.len(), 2, m, 5, 6) {
        return Err(invariant(format!(
            "{} bad variables exceed 2m^(5/6)",
            bad.len()
        )));
    }
    state.bad = bad;
    state.good = state.i_set.difference(&bad);
    let good = state.good;
    let bad_values: BTreeMap<usize, i64> = bad.iter().map(|i| (i, x[i - 1])).collect();
    let deleted_cap = tau.scaled(&BigRational::from_integer(
        (n * n.saturating_sub(1) / 2).max(1).into(),
    ))?;

    for rec in state.records.iter_mut() {
        let Some(s) = rec.cover else { continue };
        let reduced = rec.poly.substitute(&bad_values)?;
        rec.large_good_vars = reduced.variables_in_large_terms(&sigma).len();
        if at_most_power(rec.large_good_vars, 6, m, 1, 6) {
            rec.label = Some(Label::Short);
            continue;
        }
        rec.label = Some(Label::Interesting);
        let mut p_star = reduced;
        let removed = p_star.remove_quadratic_where(|i, j, _| {
            good.contains(i) && good.contains(j) && !s.contains(i) && !s.contains(j)
        });
        let mut total = BigInt::zero();
        for (_, c) in &removed {
            if tau.admits(c) {
                return Err(invariant(format!("deleted coefficient {c} is at least τ")));
            }
            total += c.abs();
        }
        if deleted_cap.cmp_abs(&total) == std::cmp::Ordering::Greater {
            return Err(invariant("deleted terms exceed τ n(n-1)/2"));
        }
        let values: BTreeMap<usize, i64> = s.iter().map(|i| (i, x[i - 1])).collect();
        rec.t_ell = Some(t_ell_statistics(&p_star, &s, &values, &sigma)?);
        rec.p_star = Some(p_star);
    }
    Ok(())
}
