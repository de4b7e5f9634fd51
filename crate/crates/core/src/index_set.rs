//! Subsets of a ground set `{1, …, n}` stored as a 64-bit mask.
//!
//! Element `i` lives in bit `i - 1`, so ground sets are capped at 63
//! elements. All set algebra is exact and total.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// Largest ground set supported by the bitmask representation.
pub const MAX_GROUND: usize = 63;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IndexSet {
    bits: u64,
    ground_size: usize,
}

impl IndexSet {
    pub fn empty(ground_size: usize) -> Result<Self> {
        check_ground(ground_size)?;
        Ok(IndexSet {
            bits: 0,
            ground_size,
        })
    }

    pub fn full(ground_size: usize) -> Result<Self> {
        check_ground(ground_size)?;
        Ok(IndexSet {
            bits: low_mask(ground_size),
            ground_size,
        })
    }

    /// The interval `{lo, …, hi}` (empty when `lo > hi`).
    pub fn range(ground_size: usize, lo: usize, hi: usize) -> Result<Self> {
        let mut s = Self::empty(ground_size)?;
        for i in lo.max(1)..=hi {
            s.insert(i)?;
        }
        Ok(s)
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(
        ground_size: usize,
        items: I,
    ) -> Result<Self> {
        let mut s = Self::empty(ground_size)?;
        for i in items {
            s.insert(i)?;
        }
        Ok(s)
    }

    /// Build from a raw mask; every set bit must lie inside the ground set.
    pub fn from_bits(ground_size: usize, bits: u64) -> Result<Self> {
        check_ground(ground_size)?;
        if bits & !low_mask(ground_size) != 0 {
            return Err(LabError::Contract(format!(
                "mask {bits:#x} has elements outside ground set of size {ground_size}"
            )));
        }
        Ok(IndexSet { bits, ground_size })
    }

    #[inline]
    pub fn bits(&self) -> u64 {
        self.bits
    }

    #[inline]
    pub fn ground_size(&self) -> usize {
        self.ground_size
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.bits.count_ones() as usize
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.bits == 0
    }

    #[inline]
    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.ground_size && self.bits & (1u64 << (i - 1)) != 0
    }

    pub fn insert(&mut self, i: usize) -> Result<()> {
        if i == 0 || i > self.ground_size {
            return Err(LabError::Contract(format!(
                "index {i} outside ground set {{1..{}}}",
                self.ground_size
            )));
        }
        self.bits |= 1u64 << (i - 1);
        Ok(())
    }

    pub fn remove(&mut self, i: usize) {
        if i >= 1 && i <= self.ground_size {
            self.bits &= !(1u64 << (i - 1));
        }
    }

    pub fn with(mut self, i: usize) -> Result<Self> {
        self.insert(i)?;
        Ok(self)
    }

    pub fn without(mut self, i: usize) -> Self {
        self.remove(i);
        self
    }

    /// Same elements over a larger ground set.
    pub fn regrounded(&self, ground_size: usize) -> Result<Self> {
        Self::from_bits(ground_size, self.bits)
    }

    pub fn union(&self, other: &Self) -> Self {
        IndexSet {
            bits: self.bits | other.bits,
            ground_size: self.ground_size.max(other.ground_size),
        }
    }

    pub fn intersection(&self, other: &Self) -> Self {
        IndexSet {
            bits: self.bits & other.bits,
            ground_size: self.ground_size.max(other.ground_size),
        }
    }

    pub fn difference(&self, other: &Self) -> Self {
        IndexSet {
            bits: self.bits & !other.bits,
            ground_size: self.ground_size,
        }
    }

    pub fn complement(&self) -> Self {
        IndexSet {
            bits: !self.bits & low_mask(self.ground_size),
            ground_size: self.ground_size,
        }
    }

    pub fn is_subset(&self, other: &Self) -> bool {
        self.bits & !other.bits == 0
    }

    pub fn is_disjoint(&self, other: &Self) -> bool {
        self.bits & other.bits == 0
    }

    /// Smallest element, if any.
    pub fn first(&self) -> Option<usize> {
        (self.bits != 0).then(|| self.bits.trailing_zeros() as usize + 1)
    }

    /// Elements in ascending order.
    pub fn iter(&self) -> Iter {
        Iter { bits: self.bits }
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self, self.ground_size)
    }
}

impl fmt::Display for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{i}")?;
        }
        f.write_str("}")
    }
}

pub struct Iter {
    bits: u64,
}

impl Iterator for Iter {
    type Item = usize;

    fn next(&mut self) -> Option<usize> {
        if self.bits == 0 {
            return None;
        }
        let tz = self.bits.trailing_zeros() as usize;
        self.bits &= self.bits - 1;
        Some(tz + 1)
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let c = self.bits.count_ones() as usize;
        (c, Some(c))
    }
}

impl ExactSizeIterator for Iter {}

impl IntoIterator for &IndexSet {
    type Item = usize;
    type IntoIter = Iter;

    fn into_iter(self) -> Iter {
        self.iter()
    }
}

/// True iff the complements of `sets` within `{1, …, ground}` are pairwise disjoint.
pub fn complement_disjoint(sets: &[IndexSet], ground: usize) -> Result<bool> {
    check_ground(ground)?;
    let full = low_mask(ground);
    let mut seen = 0u64;
    for s in sets {
        if s.bits & !full != 0 {
            return Err(LabError::Contract(format!(
                "set {s} is not inside ground set of size {ground}"
            )));
        }
        let comp = !s.bits & full;
        if comp & seen != 0 {
            return Ok(false);
        }
        seen |= comp;
    }
    Ok(true)
}

/// Iterate all `k`-subsets of `{1, …, n}` in increasing mask order.
pub fn k_subsets(n: usize, k: usize) -> impl Iterator<Item = u64> {
    let limit = if n >= 64 { u64::MAX } else { 1u64 << n };
    let mut cur = if k == 0 {
        Some(0u64)
    } else if k > n {
        None
    } else {
        Some(low_mask(k))
    };
    std::iter::from_fn(move || {
        let out = cur?;
        cur = if out == 0 {
            None
        } else {
            // Gosper's hack
            let c = out & out.wrapping_neg();
            let r = out + c;
            let next = (((r ^ out) >> 2) / c) | r;
            (next < limit && r != 0).then_some(next)
        };
        Some(out)
    })
}

#[inline]
pub(crate) fn low_mask(n: usize) -> u64 {
    if n >= 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

fn check_ground(n: usize) -> Result<()> {
    if n > MAX_GROUND {
        return Err(LabError::Capacity {
            what: "index-set ground size",
            limit: MAX_GROUND,
            got: n,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complement_disjoint_examples() {
        let full = IndexSet::full(3).unwrap();
        assert!(complement_disjoint(&[full, full, full], 3).unwrap());

        let a = IndexSet::from_indices(3, [1, 2]).unwrap();
        let b = IndexSet::from_indices(3, [1, 3]).unwrap();
        assert!(complement_disjoint(&[a, b], 3).unwrap());

        let a = IndexSet::from_indices(3, [1]).unwrap();
        let b = IndexSet::from_indices(3, [2]).unwrap();
        assert!(!complement_disjoint(&[a, b], 3).unwrap());
    }

    #[test]
    fn rejects_out_of_range() {
        assert!(IndexSet::from_indices(4, [5]).is_err());
        assert!(IndexSet::from_indices(4, [0]).is_err());
        assert!(IndexSet::empty(64).is_err());
        assert!(IndexSet::full(63).is_ok());
    }

    #[test]
    fn algebra() {
        let a = IndexSet::from_indices(6, [1, 3, 5]).unwrap();
        let b = IndexSet::from_indices(6, [3, 4]).unwrap();
        assert_eq!(a.union(&b).to_vec(), vec![1, 3, 4, 5]);
        assert_eq!(a.intersection(&b).to_vec(), vec![3]);
        assert_eq!(a.difference(&b).to_vec(), vec![1, 5]);
        assert_eq!(a.complement().to_vec(), vec![2, 4, 6]);
        assert_eq!(a.len() + a.complement().len(), 6);
        assert_eq!(a.first(), Some(1));
        assert_eq!(format!("{a}"), "{1,3,5}");
    }

    #[test]
    fn k_subsets_counts() {
        assert_eq!(k_subsets(6, 3).count(), 20);
        assert_eq!(k_subsets(5, 0).count(), 1);
        assert_eq!(k_subsets(5, 5).count(), 1);
        assert_eq!(k_subsets(3, 4).count(), 0);
        let v: Vec<u64> = k_subsets(4, 2).collect();
        assert!(v.windows(2).all(|w| w[0] < w[1]));
        assert!(v.iter().all(|m| m.count_ones() == 2 && *m < 16));
    }
}
