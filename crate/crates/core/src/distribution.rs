//! Finite discrete entry distributions with exact rational probabilities.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, Result};

/// A finite law on the integers: `(value, probability)` pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiniteLaw {
    atoms: Vec<(i64, BigRational)>,
    /// Common denominator of all probabilities.
    denom: u64,
    /// Cumulative numerators over `denom`.
    cumulative: Vec<u64>,
}

impl FiniteLaw {
    pub fn new(atoms: Vec<(i64, BigRational)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(LabError::InvalidDistribution("no support points".into()));
        }
        let mut total = BigRational::zero();
        let mut denom = BigInt::one();
        for (v, p) in &atoms {
            if !p.is_positive() {
                return Err(LabError::InvalidDistribution(format!(
                    "probability of {v} is not positive"
                )));
            }
            total += p;
            denom = denom.lcm(p.denom());
        }
        if total != BigRational::one() {
            return Err(LabError::InvalidDistribution(format!(
                "probabilities sum to {total}, not 1"
            )));
        }
        let mut values: Vec<i64> = atoms.iter().map(|(v, _)| *v).collect();
        values.sort_unstable();
        values.dedup();
        if values.len() != atoms.len() {
            return Err(LabError::InvalidDistribution(
                "repeated support point".into(),
            ));
        }
        let denom_u = denom.to_u64().ok_or_else(|| {
            LabError::InvalidDistribution("common denominator exceeds 64 bits".into())
        })?;
        let mut acc = 0u64;
        let mut cumulative = Vec::with_capacity(atoms.len());
        for (_, p) in &atoms {
            let scaled = p * BigRational::from_integer(denom.clone());
            acc += scaled.to_integer().to_u64().expect("scaled numerator fits");
            cumulative.push(acc);
        }
        Ok(FiniteLaw {
            atoms,
            denom: denom_u,
            cumulative,
        })
    }

    /// Uniform on `{-1, +1}`.
    pub fn rademacher() -> Self {
        let half = BigRational::new(1.into(), 2.into());
        FiniteLaw::new(vec![(-1, half.clone()), (1, half)]).expect("valid law")
    }

    pub fn atoms(&self) -> &[(i64, BigRational)] {
        &self.atoms
    }

    pub fn support_size(&self) -> usize {
        self.atoms.len()
    }

    pub fn max_abs(&self) -> u64 {
        self.atoms
            .iter()
            .map(|(v, _)| v.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn is_rademacher(&self) -> bool {
        *self == Self::rademacher()
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> i64 {
        let u = rng.gen_range(0..self.denom);
        let k = self.cumulative.partition_point(|&c| c <= u);
        self.atoms[k].0
    }
}

/// Off-diagonal law μ and diagonal law ν of a random symmetric matrix.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EntryDistribution {
    pub off_diag: FiniteLaw,
    pub diag: FiniteLaw,
}

impl EntryDistribution {
    pub fn new(off_diag: FiniteLaw, diag: FiniteLaw) -> Self {
        EntryDistribution { off_diag, diag }
    }

    pub fn rademacher() -> Self {
        EntryDistribution {
            off_diag: FiniteLaw::rademacher(),
            diag: FiniteLaw::rademacher(),
        }
    }

    /// Growth and endgame processes need μ with at least two support points.
    pub fn require_nontrivial(&self) -> Result<()> {
        if self.off_diag.support_size() < 2 {
            return Err(LabError::InvalidDistribution(
                "off-diagonal law must have at least two support points".into(),
            ));
        }
        Ok(())
    }

    pub fn max_abs(&self) -> u64 {
        self.off_diag.max_abs().max(self.diag.max_abs())
    }
}

impl Default for EntryDistribution {
    fn default() -> Self {
        Self::rademacher()
    }
}
