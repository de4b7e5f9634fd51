use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::Signed;
use serde::{Deserialize, Serialize};

use crate::anticonc::QuadraticPolynomial;
use crate::error::{contract, invariant, Result};
use crate::index_set::IndexSet;
use crate::matrix::Matrix;

use super::kernel::{permanent, PermanentValue};
use super::threshold::HeavinessThreshold;

fn check_in_range(m: &Matrix, a: &IndexSet, b: &IndexSet) -> Result<()> {
    if a.iter().last().is_some_and(|i| i > m.rows())
        || b.iter().last().is_some_and(|j| j > m.cols())
    {
        return Err(contract(format!(
            "index sets {a} x {b} exceed a {}x{} matrix",
            m.rows(),
            m.cols()
        )));
    }
    Ok(())
}

fn check_square(a: &IndexSet, b: &IndexSet) -> Result<()> {
    if a.len() != b.len() {
        return Err(contract(format!("|A| = {} but |B| = {}", a.len(), b.len())));
    }
    Ok(())
}

/// `per M[A, B]` with 1-based index sets.
pub fn permanent_submatrix(m: &Matrix, a: &IndexSet, b: &IndexSet) -> Result<PermanentValue> {
    check_square(a, b)?;
    check_in_range(m, a, b)?;
    let rows: Vec<usize> = a.iter().map(|i| i - 1).collect();
    let cols: Vec<usize> = b.iter().map(|j| j - 1).collect();
    permanent(&m.select(&rows, &cols))
}

/// `per M[A, B]^(i,j)`: the block with row `i` and column `j` removed.
pub fn minor_permanent(
    m: &Matrix,
    a: &IndexSet,
    b: &IndexSet,
    i: usize,
    j: usize,
) -> Result<PermanentValue> {
    check_square(a, b)?;
    if !a.contains(i) || !b.contains(j) {
        return Err(contract(format!("({i},{j}) is not in {a} x {b}")));
    }
    permanent_submatrix(m, &a.without(i), &b.without(j))
}

/// Coefficients `per M[A, B \ {i}]` for `i ∈ B`, so that a new row `x`
/// gives `per = Σ x_i · coeff(i)`.
pub fn row_expansion(
    m: &Matrix,
    a: &IndexSet,
    b: &IndexSet,
) -> Result<BTreeMap<usize, PermanentValue>> {
    if b.len() != a.len() + 1 {
        return Err(contract(format!(
            "row expansion needs |B| = |A| + 1, got |A| = {}, |B| = {}",
            a.len(),
            b.len()
        )));
    }
    check_in_range(m, a, b)?;
    b.iter()
        .map(|i| Ok((i, permanent_submatrix(m, a, &b.without(i))?)))
        .collect()
}

/// `per M'[A ∪ {n+1}, B ∪ {n+1}]` as a multilinear quadratic in the new
/// row `x_1, …, x_n` of a symmetric extension with diagonal `z`. Squares
/// are folded in as `x_i² = 1`.
pub fn double_expansion(
    m: &Matrix,
    a: &IndexSet,
    b: &IndexSet,
    z: i64,
) -> Result<QuadraticPolynomial> {
    check_square(a, b)?;
    check_in_range(m, a, b)?;
    if !m.is_symmetric() {
        return Err(contract("double expansion needs a symmetric matrix"));
    }
    let mut poly = QuadraticPolynomial::new(m.rows());
    poly.add_constant(&(permanent_submatrix(m, a, b)? * z));
    for i in a.iter() {
        for j in b.iter() {
            let c = minor_permanent(m, a, b, i, j)?;
            poly.add_quadratic(i, j, &c)?;
        }
    }
    Ok(poly)
}

pub fn is_heavy(
    m: &Matrix,
    a: &IndexSet,
    b: &IndexSet,
    lambda: &HeavinessThreshold,
) -> Result<bool> {
    Ok(lambda.admits(&permanent_submatrix(m, a, b)?))
}

/// Which branch of the case split produced the pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PairCase {
    /// `(i, j) = (b_s, a)` for the given `s ∈ {1, 2}`.
    Corner(u8),
    /// `(i, j) = (b1, b2)`.
    Both,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NoncancellingPair {
    pub i: usize,
    pub j: usize,
    pub a_prime: IndexSet,
    pub b_prime: IndexSet,
    /// `per M[A',B']^(i,j) + per M[A',B']^(j,i)`.
    pub coefficient: BigInt,
    pub case: PairCase,
}

/// Pick distinct `i, j ∈ {a, b1, b2}` whose two minors of `M[A', B']` do
/// not cancel below `λ/2`. Ties go to the first case in order `s = 1, 2`,
/// then `(b1, b2)`.
pub fn choose_noncancelling_pair(
    m: &Matrix,
    a_set: &IndexSet,
    b_set: &IndexSet,
    a: usize,
    b1: usize,
    b2: usize,
    lambda: &HeavinessThreshold,
) -> Result<NoncancellingPair> {
    check_square(a_set, b_set)?;
    check_in_range(m, a_set, b_set)?;
    if !b_set.contains(a) || a_set.contains(a) {
        return Err(contract(format!("a = {a} is not in B \\ A")));
    }
    if b1 == b2 {
        return Err(contract("b1 and b2 must be distinct"));
    }
    for b in [b1, b2] {
        if !a_set.contains(b) || b_set.contains(b) {
            return Err(contract(format!("b = {b} is not in A \\ B")));
        }
    }
    let per = permanent_submatrix(m, a_set, b_set)?;
    if !lambda.admits(&per) {
        return Err(contract(format!(
            "M[A,B] has permanent {per}, not {lambda}-heavy"
        )));
    }
    let half = lambda.half();
    // Flip signs so that the heavy permanent is positive.
    let sign: i64 = if per.is_negative() { -1 } else { 1 };
    let a_prime = a_set.with(a)?;
    let b_minus_a = b_set.without(a);

    let mut candidates = Vec::with_capacity(2);
    for (s, bs) in [(1u8, b1), (2u8, b2)] {
        let x = permanent_submatrix(m, &a_set.without(bs).with(a)?, &b_minus_a.with(bs)?)?;
        let signed: BigInt = &x * sign;
        // signed ≥ -λ/2  ⇔  signed ≥ 0 or |signed| ≤ λ/2
        if !signed.is_negative() || half.cmp_abs(&signed) != std::cmp::Ordering::Greater {
            let out = NoncancellingPair {
                i: bs,
                j: a,
                a_prime,
                b_prime: b_set.with(bs)?,
                coefficient: &per + &x,
                case: PairCase::Corner(s),
            };
            return verified(m, out, &half);
        }
        candidates.push(x);
    }
    let out = NoncancellingPair {
        i: b1,
        j: b2,
        a_prime,
        b_prime: b_minus_a.with(b1)?.with(b2)?,
        coefficient: &candidates[0] + &candidates[1],
        case: PairCase::Both,
    };
    verified(m, out, &half)
}

fn verified(
    m: &Matrix,
    out: NoncancellingPair,
    half: &HeavinessThreshold,
) -> Result<NoncancellingPair> {
    let direct = minor_permanent(m, &out.a_prime, &out.b_prime, out.i, out.j)?
        + minor_permanent(m, &out.a_prime, &out.b_prime, out.j, out.i)?;
    if direct != out.coefficient {
        return Err(invariant(format!(
            "pair coefficient {} disagrees with direct minors {direct}",
            out.coefficient
        )));
    }
    if !half.admits(&direct) {
        return Err(invariant(format!(
            "selected pair ({}, {}) has coefficient {direct} below {half}",
            out.i, out.j
        )));
    }
    Ok(out)
}
