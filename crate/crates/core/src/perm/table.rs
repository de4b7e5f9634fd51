//! Permanents of every `r`-column block of a fixed row set.
//!
//! For rows `A` and a column ground `{1, …, g}`, Ryser's formula gives
//! `per M[A, B] = Σ_{S ⊆ B} h(S)` with `h(S) = (-1)^(r-|S|) Π_i Σ_{j∈S} m_ij`.
//! One Gray-code pass fills `h` and a subset-sum transform yields every
//! `per M[A, B]` with `|B| = r` at once. Small `r` uses direct evaluation.

use num_traits::{WrappingAdd, WrappingMul, WrappingNeg};

use crate::error::{LabError, Result};
use crate::index_set::{k_subsets, IndexSet};
use crate::matrix::Matrix;

use super::kernel::{permanent_ryser_i128, ryser_fits_i128};

/// Largest column ground handled by the table.
pub const TABLE_MAX_GROUND: usize = 24;

#[derive(Debug, Clone)]
pub struct SubsetPermanents {
    ground: usize,
    rows: IndexSet,
    /// `(mask of B, per M[A, B])` in increasing mask order.
    entries: Vec<(u64, i128)>,
}

impl SubsetPermanents {
    /// All `per M[A, B]` for `B ⊆ {1, …, ground}` with `|B| = |A|`.
    pub fn compute(m: &Matrix, rows: &IndexSet, ground: usize) -> Result<Self> {
        if ground > TABLE_MAX_GROUND {
            return Err(LabError::Capacity {
                what: "subset permanent table ground",
                limit: TABLE_MAX_GROUND,
                got: ground,
            });
        }
        if ground > m.cols() || rows.iter().last().is_some_and(|i| i > m.rows()) {
            return Err(LabError::Contract(format!(
                "rows {rows} / ground {ground} exceed a {}x{} matrix",
                m.rows(),
                m.cols()
            )));
        }
        let r = rows.len();
        if r > ground {
            return Ok(SubsetPermanents {
                ground,
                rows: *rows,
                entries: Vec::new(),
            });
        }
        let row_idx: Vec<usize> = rows.iter().map(|i| i - 1).collect();
        let block = m.select(&row_idx, &(0..ground).collect::<Vec<_>>());
        let bound = Matrix::filled(r, block.max_abs().max(1) as i64);
        if !ryser_fits_i128(&bound) || (ground as u128) * (block.max_abs() as u128) >= 1 << 62 {
            return Err(LabError::Overflow(format!(
                "subset permanents with {r} rows may exceed 2^127"
            )));
        }
        let direct_cost = binom(ground, r).saturating_mul((r as u128 + 1) << r);
        let table_cost = ((ground + r) as u128) << ground;
        let entries = if direct_cost <= table_cost {
            direct(&block, r, ground)?
        } else {
            zeta(&block, r, ground)
        };
        Ok(SubsetPermanents {
            ground,
            rows: *rows,
            entries,
        })
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn rows(&self) -> &IndexSet {
        &self.rows
    }

    /// Number of column sets, `C(ground, |A|)`.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// `per M[A, B]`, or `None` when `|B| ≠ |A|` or `B` leaves the ground.
    pub fn get(&self, b: &IndexSet) -> Option<i128> {
        self.get_mask(b.bits())
    }

    pub fn get_mask(&self, mask: u64) -> Option<i128> {
        self.entries
            .binary_search_by_key(&mask, |e| e.0)
            .ok()
            .map(|k| self.entries[k].1)
    }

    /// All `(mask, per)` pairs in increasing mask order.
    pub fn entries(&self) -> &[(u64, i128)] {
        &self.entries
    }

    /// Masks whose permanent has absolute value at least `min_abs`.
    pub fn heavy_masks(&self, min_abs: u128) -> impl Iterator<Item = u64> + '_ {
        self.entries
            .iter()
            .filter(move |e| e.1.unsigned_abs() >= min_abs)
            .map(|e| e.0)
    }

    pub fn count_heavy(&self, min_abs: u128) -> usize {
        self.heavy_masks(min_abs).count()
    }
}

fn binom(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut out: u128 = 1;
    for i in 0..k {
        out = out * (n - i) as u128 / (i + 1) as u128;
    }
    out
}

fn direct(block: &Matrix, r: usize, ground: usize) -> Result<Vec<(u64, i128)>> {
    let row_idx: Vec<usize> = (0..r).collect();
    k_subsets(ground, r)
        .map(|mask| {
            let cols: Vec<usize> = (0..ground).filter(|j| mask >> j & 1 == 1).collect();
            Ok((mask, permanent_ryser_i128(&block.select(&row_idx, &cols))?))
        })
        .collect()
}

fn zeta(block: &Matrix, r: usize, ground: usize) -> Vec<(u64, i128)> {
    // Ring arithmetic mod 2^64 is exact once the permanents themselves fit.
    let bound = Matrix::filled(r, block.max_abs().max(1) as i64);
    if permanent_ryser_i128(&bound).is_ok_and(|p| p < 1 << 62) {
        zeta_in::<i64>(block, r, ground)
            .into_iter()
            .map(|(m, v)| (m, v as i128))
            .collect()
    } else {
        zeta_in::<i128>(block, r, ground)
    }
}

fn zeta_in<T>(block: &Matrix, r: usize, ground: usize) -> Vec<(u64, T)>
where
    T: Copy + From<i64> + WrappingAdd + WrappingMul + WrappingNeg,
{
    let size = 1usize << ground;
    let zero = T::from(0);
    let mut f = vec![zero; size];
    let cols: Vec<Vec<i64>> = (0..ground)
        .map(|j| (0..r).map(|i| block.get(i, j)).collect())
        .collect();
    let mut sums = vec![0i64; r];
    let mut current = 0usize;
    // h(∅) = (-1)^r · 0^r
    f[0] = T::from(i64::from(r == 0));
    for t in 1..size {
        let j = t.trailing_zeros() as usize;
        current ^= 1 << j;
        if current >> j & 1 == 1 {
            for (s, a) in sums.iter_mut().zip(&cols[j]) {
                *s += a;
            }
        } else {
            for (s, a) in sums.iter_mut().zip(&cols[j]) {
                *s -= a;
            }
        }
        let mut prod = T::from(1);
        for &s in &sums {
            prod = prod.wrapping_mul(&T::from(s));
        }
        let odd = (r + current.count_ones() as usize) % 2 == 1;
        f[current] = if odd { prod.wrapping_neg() } else { prod };
    }
    for j in 0..ground {
        let bit = 1usize << j;
        for chunk in f.chunks_exact_mut(2 * bit) {
            let (lo, hi) = chunk.split_at_mut(bit);
            for (h, l) in hi.iter_mut().zip(lo.iter()) {
                *h = h.wrapping_add(l);
            }
        }
    }
    k_subsets(ground, r)
        .map(|mask| (mask, f[mask as usize]))
        .collect()
}
