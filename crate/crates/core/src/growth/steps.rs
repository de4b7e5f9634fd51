use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::error::{contract, invariant, Result};
use crate::index_set::IndexSet;
use crate::matrix::Matrix;
use crate::perm::{
    choose_noncancelling_pair, permanent_submatrix, HeavinessThreshold, NoncancellingPair,
};

fn pre_extension(m_ext: &Matrix) -> Result<(usize, Matrix)> {
    if !m_ext.is_square() || m_ext.rows() < 2 {
        return Err(contract("extended matrix must be square with n ≥ 2"));
    }
    let n = m_ext.rows();
    let idx: Vec<usize> = (0..n - 1).collect();
    Ok((n, m_ext.select(&idx, &idx)))
}

fn within(s: &IndexSet, bound: usize, name: &str) -> Result<()> {
    if s.iter().last().is_some_and(|i| i > bound) {
        return Err(contract(format!(
            "{name} = {s} is not inside {{1..{bound}}}"
        )));
    }
    Ok(())
}

/// Smallest `i ∈ I` with `M_ext[A ∪ {n}, B ∪ {i}]` `λ`-heavy, where `n`
/// is the last index of the extended matrix.
pub fn augment_one_column(
    m_ext: &Matrix,
    a: &IndexSet,
    b: &IndexSet,
    i_set: &IndexSet,
    lambda: &HeavinessThreshold,
) -> Result<Option<usize>> {
    let (n, m) = pre_extension(m_ext)?;
    within(a, n - 1, "A")?;
    within(b, n - 1, "B")?;
    within(i_set, n - 1, "I")?;
    if a.len() != b.len() {
        return Err(contract("|A| ≠ |B|"));
    }
    if i_set.is_empty() || !i_set.is_disjoint(b) {
        return Err(contract(format!(
            "I = {i_set} must be non-empty and disjoint from B"
        )));
    }
    if !lambda.admits(&permanent_submatrix(&m, a, b)?) {
        return Err(contract(format!("M[A,B] is not {lambda}-heavy")));
    }
    let rows = a.regrounded(n)?.with(n)?;
    for i in i_set.iter() {
        let cols = b.regrounded(n)?.with(i)?;
        if lambda.admits(&permanent_submatrix(m_ext, &rows, &cols)?) {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CornerStep {
    pub pair: NoncancellingPair,
    /// `A ∪ {a, n}`.
    pub rows: IndexSet,
    /// `(B \ {a}) ∪ {i, j, n}`.
    pub cols: IndexSet,
    pub permanent: BigInt,
    /// `|permanent| ≥ λ/2`.
    pub heavy: bool,
}

impl CornerStep {
    pub fn accepted(&self) -> Option<(IndexSet, IndexSet)> {
        self.heavy.then_some((self.rows, self.cols))
    }
}

/// Pick `(i, j)` on the pre-extension matrix, then test the grown
/// submatrix of the extension for `λ/2`-heaviness.
pub fn corner_step(
    m_ext: &Matrix,
    a_set: &IndexSet,
    b_set: &IndexSet,
    a: usize,
    b1: usize,
    b2: usize,
    lambda: &HeavinessThreshold,
) -> Result<CornerStep> {
    let (n, m) = pre_extension(m_ext)?;
    within(a_set, n - 1, "A")?;
    within(b_set, n - 1, "B")?;
    let pair = choose_noncancelling_pair(&m, a_set, b_set, a, b1, b2, lambda)?;
    let rows = pair.a_prime.regrounded(n)?.with(n)?;
    let cols = pair.b_prime.regrounded(n)?.with(n)?;
    let permanent = permanent_submatrix(m_ext, &rows, &cols)?;
    let heavy = lambda.half().admits(&permanent);
    Ok(CornerStep {
        pair,
        rows,
        cols,
        permanent,
        heavy,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    /// `Σ_{q<K} q|S_q| ≥ RN/2`.
    EPrime,
    EDoublePrime,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChildHistogram {
    /// `(q, |S_q|)` for every `q ≥ 1` that occurs.
    pub histogram: Vec<(usize, usize)>,
    /// `Σ_{q<K} q|S_q|`.
    pub below_k: u64,
    /// `Σ_{q≥K} q|S_q|`.
    pub at_least_k: u64,
    pub parents: usize,
    pub r: usize,
    pub branch: Branch,
}

/// Children of `parents` (supersets by one element inside
/// `{1, …, ground}`), their parent-count histogram and the `E′/E″` branch.
/// Returns the children map as well, keyed by mask.
pub(crate) fn child_counts(parents: &[u64], ground: usize) -> BTreeMap<u64, usize> {
    let full = if ground == 64 {
        u64::MAX
    } else {
        (1u64 << ground) - 1
    };
    let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
    for &p in parents {
        let mut free = full & !p;
        while free != 0 {
            let bit = free & free.wrapping_neg();
            free ^= bit;
            *counts.entry(p | bit).or_default() += 1;
        }
    }
    counts
}

/// Classify one step of the weak-growth process from its parent family
/// `B_1, …, B_N ⊆ {1, …, k+R}` of size `k`.
pub fn classify_growth_step(
    parents: &[IndexSet],
    k: usize,
    r: usize,
    big_k: &BigRational,
) -> Result<ChildHistogram> {
    let ground = k + r;
    let mut masks: Vec<u64> = Vec::with_capacity(parents.len());
    for p in parents {
        if p.len() != k || p.iter().last().is_some_and(|i| i > ground) {
            return Err(contract(format!(
                "parent {p} is not a {k}-subset of {{1..{ground}}}"
            )));
        }
        masks.push(p.bits());
    }
    masks.sort_unstable();
    if masks.windows(2).any(|w| w[0] == w[1]) {
        return Err(contract("parent family has repeated sets"));
    }
    classify_masks(&masks, k, r, big_k)
}

pub(crate) fn classify_masks(
    masks: &[u64],
    k: usize,
    r: usize,
    big_k: &BigRational,
) -> Result<ChildHistogram> {
    let counts = child_counts(masks, k + r);
    let mut hist: BTreeMap<usize, usize> = BTreeMap::new();
    for &q in counts.values() {
        *hist.entry(q).or_default() += 1;
    }
    let mut below_k = 0u64;
    let mut at_least_k = 0u64;
    for (&q, &c) in &hist {
        let w = (q * c) as u64;
        if BigRational::from_integer(q.into()) < *big_k {
            below_k += w;
        } else {
            at_least_k += w;
        }
    }
    let rn = (r * masks.len()) as u64;
    if below_k + at_least_k != rn {
        return Err(invariant(format!(
            "double counting: Σ q|S_q| = {} but RN = {rn}",
            below_k + at_least_k
        )));
    }
    let branch = if 2 * below_k >= rn {
        Branch::EPrime
    } else {
        Branch::EDoublePrime
    };
    Ok(ChildHistogram {
        histogram: hist.into_iter().collect(),
        below_k,
        at_least_k,
        parents: masks.len(),
        r,
        branch,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn single_parent_has_r_children() {
        let p = IndexSet::from_indices(7, [2, 5]).unwrap();
        let h = classify_growth_step(&[p], 2, 5, &q(4, 1)).unwrap();
        assert_eq!(h.histogram, vec![(1, 5)]);
        assert_eq!(h.below_k + h.at_least_k, 5);
        assert_eq!(h.branch, Branch::EPrime);
    }

    #[test]
    fn disjoint_children() {
        // {1} and {4} in ground 4 (k = 1, R = 3) share child {1,4} only.
        let a = IndexSet::from_indices(4, [1]).unwrap();
        let b = IndexSet::from_indices(4, [4]).unwrap();
        let h = classify_growth_step(&[a, b], 1, 3, &q(2, 1)).unwrap();
        assert_eq!(h.histogram, vec![(1, 4), (2, 1)]);
        assert_eq!(h.below_k, 4);
        assert_eq!(h.at_least_k, 2);
        assert!(classify_growth_step(&[a, a], 1, 3, &q(2, 1)).is_err());
    }
}
