use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{contract, invariant, Result};
use crate::growth::HeavyFamily;
use crate::index_set::{complement_disjoint, IndexSet};
use crate::matrix::Matrix;
use crate::perm::{
    choose_noncancelling_pair, double_expansion, permanent_submatrix, HeavinessThreshold,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Quadruple {
    pub a_star: IndexSet,
    pub b_star: IndexSet,
    pub i: usize,
    pub j: usize,
    /// Coefficient of `x_i x_j` in `per M_{n+1}[A* ∪ {n+1}, B* ∪ {n+1}]`.
    pub coefficient: BigInt,
}

fn single(s: IndexSet) -> Result<usize> {
    match (s.len(), s.first()) {
        (1, Some(v)) => Ok(v),
        _ => Err(contract(format!(
            "expected a single complement element, got {s}"
        ))),
    }
}

/// Check the family shape the endgame step needs: sizes `n - L`,
/// complement-disjoint rows and columns together, every member heavy.
pub fn check_endgame_family(m: &Matrix, family: &HeavyFamily) -> Result<usize> {
    let n = m.rows();
    if family.ground != n || family.is_empty() {
        return Err(contract(format!(
            "family over ground {} is empty or not over {{1..{n}}}",
            family.ground
        )));
    }
    let size = family.records[0].rows.len();
    if size >= n
        || family
            .records
            .iter()
            .any(|r| r.rows.len() != size || r.cols.len() != size)
    {
        return Err(contract("family sets must all have size n - L with L ≥ 1"));
    }
    let all: Vec<IndexSet> = family
        .records
        .iter()
        .flat_map(|r| [r.rows, r.cols])
        .collect();
    if !complement_disjoint(&all, n)? {
        return Err(contract("family is not complement-disjoint"));
    }
    family.verify(m)?;
    Ok(n - size)
}

/// Turn each heavy pair `(A_ℓ, B_ℓ)` into `(A*_ℓ, B*_ℓ, i_ℓ, j_ℓ)` of size
/// `n - L + 1` whose `x_i x_j` coefficient is at least `λ/2`.
pub fn build_quadruples(m: &Matrix, family: &HeavyFamily) -> Result<Vec<Quadruple>> {
    let l = check_endgame_family(m, family)?;
    let n = m.rows();
    let lambda = &family.lambda;
    let full = IndexSet::full(n)?;
    let mut out = Vec::with_capacity(family.len());
    for rec in &family.records {
        let (a, b) = (rec.rows.regrounded(n)?, rec.cols.regrounded(n)?);
        let q = if l == 1 {
            let i = single(full.difference(&a))?;
            let j = single(full.difference(&b))?;
            let poly = double_expansion(m, &full, &full, 0)?;
            Quadruple {
                a_star: full,
                b_star: full,
                i,
                j,
                coefficient: poly.quadratic_coeff(i, j),
            }
        } else {
            let a_el = b
                .difference(&a)
                .first()
                .ok_or_else(|| contract("B \\ A is empty"))?;
            let mut free = a.difference(&b).iter();
            let (b1, b2) = match (free.next(), free.next()) {
                (Some(x), Some(y)) => (x, y),
                _ => return Err(contract("A \\ B has fewer than two elements")),
            };
            let pair = choose_noncancelling_pair(m, &a, &b, a_el, b1, b2, lambda)?;
            Quadruple {
                a_star: pair.a_prime,
                b_star: pair.b_prime,
                i: pair.i,
                j: pair.j,
                coefficient: pair.coefficient,
            }
        };
        out.push(q);
    }
    verify_quadruples(m, &out, l, lambda)?;
    Ok(out)
}

/// The four conditions on a quadruple family, recomputed from `m`.
pub fn verify_quadruples(
    m: &Matrix,
    qs: &[Quadruple],
    l: usize,
    lambda: &HeavinessThreshold,
) -> Result<()> {
    let n = m.rows();
    let half = lambda.half();
    let mut used = IndexSet::empty(n)?;
    for q in qs {
        if q.a_star.len() != n - l + 1 || q.b_star.len() != n - l + 1 {
            return Err(invariant(format!(
                "quadruple sets {} / {} have the wrong size",
                q.a_star, q.b_star
            )));
        }
        let inside = |v: usize| q.a_star.contains(v) && q.b_star.contains(v);
        if q.i == q.j || !inside(q.i) || !inside(q.j) || used.contains(q.i) || used.contains(q.j) {
            return Err(invariant(format!(
                "indices ({}, {}) are not distinct members of A* ∩ B*",
                q.i, q.j
            )));
        }
        used.insert(q.i)?;
        used.insert(q.j)?;
        let poly = double_expansion(m, &q.a_star, &q.b_star, 0)?;
        let c = poly.quadratic_coeff(q.i, q.j);
        if c != q.coefficient || !half.admits(&c) {
            return Err(invariant(format!(
                "coefficient of x{}x{} is {c}, recorded {}",
                q.i, q.j, q.coefficient
            )));
        }
    }
    let all: Vec<IndexSet> = qs.iter().flat_map(|q| [q.a_star, q.b_star]).collect();
    if !complement_disjoint(&all, n)? {
        return Err(invariant("A*/B* family is not complement-disjoint"));
    }
    Ok(())
}

/// Search complements `(X_ℓ, Y_ℓ)` of size `L`, all `2m` pairwise
/// disjoint, with `M[[n] \ X_ℓ, [n] \ Y_ℓ]` `λ`-heavy. Candidates are
/// scanned in mask order and the first family found is returned.
pub fn find_endgame_family(
    m: &Matrix,
    l: usize,
    count: usize,
    lambda: &HeavinessThreshold,
) -> Result<Option<HeavyFamily>> {
    let n = m.rows();
    if l == 0 || 2 * l * count > n {
        return Err(contract(format!(
            "{count} disjoint complement pairs of size {l} do not fit in {n}"
        )));
    }
    let full = IndexSet::full(n)?;
    let singles: Vec<IndexSet> = crate::index_set::k_subsets(n, l)
        .map(|mask| IndexSet::from_bits(n, mask))
        .collect::<Result<_>>()?;
    let mut candidates: Vec<(IndexSet, IndexSet, BigInt)> = Vec::new();
    for x in &singles {
        for y in singles.iter().filter(|y| y.is_disjoint(x)) {
            let (a, b) = (full.difference(x), full.difference(y));
            let per = permanent_submatrix(m, &a, &b)?;
            if lambda.admits(&per) {
                candidates.push((*x, *y, per));
            }
        }
    }
    let mut chosen: Vec<usize> = Vec::new();
    if !search(&candidates, 0, count, 0, &mut chosen) {
        return Ok(None);
    }
    let mut fam = HeavyFamily::new(lambda.clone(), n);
    for &k in &chosen {
        let (x, y, per) = &candidates[k];
        fam.push(full.difference(x), full.difference(y), per.clone())?;
    }
    fam.complement_disjoint = true;
    Ok(Some(fam))
}

fn search(
    c: &[(IndexSet, IndexSet, BigInt)],
    from: usize,
    left: usize,
    used: u64,
    chosen: &mut Vec<usize>,
) -> bool {
    if left == 0 {
        return true;
    }
    for k in from..c.len() {
        let bits = c[k].0.bits() | c[k].1.bits();
        if bits & used == 0 {
            chosen.push(k);
            if search(c, k + 1, left - 1, used | bits, chosen) {
                return true;
            }
            chosen.pop();
        }
    }
    false
}
