use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use crate::error::{contract, invariant, Result};
use crate::index_set::{complement_disjoint, IndexSet};
use crate::matrix::Matrix;
use crate::perm::{permanent_naive, permanent_ryser, HeavinessThreshold};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeavyRecord {
    pub rows: IndexSet,
    pub cols: IndexSet,
    pub permanent: BigInt,
}

/// Submatrices that are all `λ`-heavy for a shared threshold.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeavyFamily {
    pub lambda: HeavinessThreshold,
    /// Dimension of the matrix the records refer to.
    pub ground: usize,
    pub records: Vec<HeavyRecord>,
    /// Whether row sets and column sets are each complement-disjoint.
    pub complement_disjoint: bool,
}

impl HeavyFamily {
    pub fn new(lambda: HeavinessThreshold, ground: usize) -> Self {
        HeavyFamily {
            lambda,
            ground,
            records: Vec::new(),
            complement_disjoint: false,
        }
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn push(&mut self, rows: IndexSet, cols: IndexSet, permanent: BigInt) -> Result<()> {
        if rows.len() != cols.len() {
            return Err(contract(format!("record {rows} x {cols} is not square")));
        }
        if !self.lambda.admits(&permanent) {
            return Err(contract(format!(
                "permanent {permanent} is below {}",
                self.lambda
            )));
        }
        self.records.push(HeavyRecord {
            rows,
            cols,
            permanent,
        });
        Ok(())
    }

    /// Recompute every permanent from `m` with an independent kernel and
    /// check the family invariants.
    pub fn verify(&self, m: &Matrix) -> Result<()> {
        if m.rows() != self.ground {
            return Err(contract(format!(
                "family over ground {} checked against a {}x{} matrix",
                self.ground,
                m.rows(),
                m.cols()
            )));
        }
        for r in &self.records {
            if r.rows.len() != r.cols.len() {
                return Err(invariant(format!(
                    "record {} x {} is not square",
                    r.rows, r.cols
                )));
            }
            let rows: Vec<usize> = r.rows.iter().map(|i| i - 1).collect();
            let cols: Vec<usize> = r.cols.iter().map(|j| j - 1).collect();
            let block = m.select(&rows, &cols);
            let per = if block.rows() <= 8 {
                permanent_naive(&block)?
            } else {
                permanent_ryser(&block)?
            };
            if per != r.permanent {
                return Err(invariant(format!(
                    "recorded permanent {} of {} x {} recomputes to {per}",
                    r.permanent, r.rows, r.cols
                )));
            }
            if !self.lambda.admits(&per) {
                return Err(invariant(format!(
                    "{} x {} has permanent {per}, below {}",
                    r.rows, r.cols, self.lambda
                )));
            }
        }
        if self.complement_disjoint {
            let rows: Vec<IndexSet> = self.records.iter().map(|r| r.rows).collect();
            let cols: Vec<IndexSet> = self.records.iter().map(|r| r.cols).collect();
            if !complement_disjoint(&rows, self.ground)?
                || !complement_disjoint(&cols, self.ground)?
            {
                return Err(invariant("family flagged complement-disjoint is not"));
            }
        }
        Ok(())
    }
}
