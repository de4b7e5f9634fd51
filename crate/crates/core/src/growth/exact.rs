//! Exact conditional probabilities of the single-step events, obtained by
//! enumerating every extension row of a fixed pre-extension matrix.

use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::distribution::EntryDistribution;
use crate::error::{contract, Result};
use crate::index_set::IndexSet;
use crate::matrix::{Matrix, SymmetricMatrixProcess};
use crate::perm::HeavinessThreshold;

use super::steps::{augment_one_column, corner_step};

const MAX_ENUMERATED_ROWS: u64 = 1 << 20;

/// Calls `f` on every extended matrix with the probability of its row.
fn for_each_extension(
    m: &Matrix,
    dist: &EntryDistribution,
    mut f: impl FnMut(&Matrix, &BigRational) -> Result<()>,
) -> Result<()> {
    let base = SymmetricMatrixProcess::from_matrix(m, dist.clone())?;
    let n = m.rows();
    let off = dist.off_diag.atoms();
    let diag = dist.diag.atoms();
    let count = (off.len() as u64)
        .checked_pow(n as u32)
        .and_then(|c| c.checked_mul(diag.len() as u64))
        .filter(|&c| c <= MAX_ENUMERATED_ROWS)
        .ok_or_else(|| contract(format!("too many extension rows to enumerate at n = {n}")))?;
    let mut digits = vec![0usize; n + 1];
    for _ in 0..count {
        let row: Vec<i64> = digits[..n].iter().map(|&d| off[d].0).collect();
        let z = diag[digits[n]].0;
        let mut weight = diag[digits[n]].1.clone();
        for &d in &digits[..n] {
            weight *= &off[d].1;
        }
        f(&base.extend_with(&row, z)?.to_matrix(), &weight)?;
        for (pos, d) in digits.iter_mut().enumerate() {
            *d += 1;
            let radix = if pos == n { diag.len() } else { off.len() };
            if *d < radix {
                break;
            }
            *d = 0;
        }
    }
    Ok(())
}

/// `Pr(M_n[A ∪ {n}, B ∪ {i}]` is `λ`-heavy for some `i ∈ I | M_{n-1} = m)`.
pub fn augment_success_probability(
    m: &Matrix,
    a: &IndexSet,
    b: &IndexSet,
    i_set: &IndexSet,
    lambda: &HeavinessThreshold,
    dist: &EntryDistribution,
) -> Result<BigRational> {
    let mut p = BigRational::zero();
    for_each_extension(m, dist, |ext, w| {
        if augment_one_column(ext, a, b, i_set, lambda)?.is_some() {
            p += w;
        }
        Ok(())
    })?;
    Ok(p)
}

/// `Pr(` the corner step accepts `| M_{n-1} = m)`, with `(i, j)` fixed by
/// `m` before the row is exposed.
#[allow(clippy::too_many_arguments)]
pub fn corner_success_probability(
    m: &Matrix,
    a_set: &IndexSet,
    b_set: &IndexSet,
    a: usize,
    b1: usize,
    b2: usize,
    lambda: &HeavinessThreshold,
    dist: &EntryDistribution,
) -> Result<BigRational> {
    let mut p = BigRational::zero();
    let mut pair = None;
    for_each_extension(m, dist, |ext, w| {
        let step = corner_step(ext, a_set, b_set, a, b1, b2, lambda)?;
        let chosen = (step.pair.i, step.pair.j);
        if *pair.get_or_insert(chosen) != chosen {
            return Err(contract("pair choice depends on the extension row"));
        }
        if step.heavy {
            p += w;
        }
        Ok(())
    })?;
    debug_assert!(p <= BigRational::one());
    Ok(p)
}
