//! Dense integer matrices and the coupled symmetric matrix process.
//!
//! `SymmetricMatrixProcess` models the first `n` rows and columns of an
//! infinite random symmetric matrix. Exposure step `k` draws row `k`
//! (entries `x_1, …, x_{k-1}` from μ and the diagonal from ν) from the
//! generator for step `k`, so `sample(n)` and `sample(m)` followed by
//! `n - m` extensions produce the same matrix.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distribution::EntryDistribution;
use crate::error::{contract, LabError, Result};
use crate::index_set::{IndexSet, MAX_GROUND};
use crate::seed::SeedSpec;

/// Row-major dense integer matrix. Indices are 0-based.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<i64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0; rows * cols],
        }
    }

    pub fn from_rows(rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        if rows.iter().any(|row| row.len() != c) {
            return Err(contract("ragged rows"));
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            data: rows.concat(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> i64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Matrix { rows, cols, data }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| i64::from(i == j))
    }

    pub fn filled(n: usize, v: i64) -> Self {
        Self::from_fn(n, n, |_, _| v)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: i64) {
        self.data[i * self.cols + j] = v;
    }

    pub fn row(&self, i: usize) -> &[i64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_abs(&self) -> u64 {
        self.data
            .iter()
            .map(|v| v.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self.get(i, j) == self.get(j, i)))
    }

    /// Rows `rows` and columns `cols` (0-based, in the given order).
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Matrix {
        Matrix::from_fn(rows.len(), cols.len(), |i, j| self.get(rows[i], cols[j]))
    }

    /// Remove row `i` and column `j` (0-based).
    pub fn minor(&self, i: usize, j: usize) -> Matrix {
        let rows: Vec<usize> = (0..self.rows).filter(|&r| r != i).collect();
        let cols: Vec<usize> = (0..self.cols).filter(|&c| c != j).collect();
        self.select(&rows, &cols)
    }

    pub fn transpose(&self) -> Matrix {
        Matrix::from_fn(self.cols, self.rows, |i, j| self.get(j, i))
    }

    /// Append a row at the bottom.
    pub fn with_row(&self, row: &[i64]) -> Result<Matrix> {
        if row.len() != self.cols {
            return Err(contract("appended row has wrong length"));
        }
        let mut data = self.data.clone();
        data.extend_from_slice(row);
        Ok(Matrix {
            rows: self.rows + 1,
            cols: self.cols,
            data,
        })
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            writeln!(f, "  {:?}", self.row(i))?;
        }
        write!(f, "]")
    }
}

/// Where the entries of one exposure step came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowSource {
    Seeded(SeedSpec),
    /// Supplied explicitly (exhaustive enumeration of extension rows).
    Explicit,
}

/// A growing random symmetric matrix `M_1 ⊂ M_2 ⊂ …`.
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymmetricMatrixProcess {
    n: usize,
    /// Lower triangle including the diagonal; row `i` (0-based) occupies
    /// `i*(i+1)/2 .. (i+1)*(i+2)/2`.
    lower: Vec<i64>,
    dist: EntryDistribution,
    seed_path: Vec<RowSource>,
}

impl SymmetricMatrixProcess {
    /// The 0×0 matrix, ready to be extended.
    pub fn empty(dist: EntryDistribution) -> Self {
        SymmetricMatrixProcess {
            n: 0,
            lower: Vec::new(),
            dist,
            seed_path: Vec::new(),
        }
    }

    /// Wrap an explicit symmetric matrix.
    pub fn from_matrix(m: &Matrix, dist: EntryDistribution) -> Result<Self> {
        if !m.is_symmetric() {
            return Err(contract("matrix is not symmetric"));
        }
        check_capacity(m.rows())?;
        let mut lower = Vec::with_capacity(m.rows() * (m.rows() + 1) / 2);
        for i in 0..m.rows() {
            for j in 0..=i {
                lower.push(m.get(i, j));
            }
        }
        Ok(SymmetricMatrixProcess {
            n: m.rows(),
            lower,
            dist,
            seed_path: vec![RowSource::Explicit; m.rows()],
        })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn distribution(&self) -> &EntryDistribution {
        &self.dist
    }

    pub fn seed_path(&self) -> &[RowSource] {
        &self.seed_path
    }

    /// Entry `(i, j)` with 1-based indices.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> i64 {
        debug_assert!(i >= 1 && j >= 1 && i <= self.n && j <= self.n);
        let (r, c) = if i >= j {
            (i - 1, j - 1)
        } else {
            (j - 1, i - 1)
        };
        self.lower[r * (r + 1) / 2 + c]
    }

    /// The last exposed row `(x_1, …, x_{n-1})` and its diagonal entry.
    pub fn last_row(&self) -> Option<(Vec<i64>, i64)> {
        let n = self.n;
        (n > 0).then(|| ((1..n).map(|j| self.entry(n, j)).collect(), self.entry(n, n)))
    }

    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_fn(self.n, self.n, |i, j| self.entry(i + 1, j + 1))
    }

    /// The leading `k×k` block as a process of its own.
    pub fn prefix(&self, k: usize) -> Result<Self> {
        if k > self.n {
            return Err(contract(format!("prefix {k} exceeds dimension {}", self.n)));
        }
        Ok(SymmetricMatrixProcess {
            n: k,
            lower: self.lower[..k * (k + 1) / 2].to_vec(),
            dist: self.dist.clone(),
            seed_path: self.seed_path[..k].to_vec(),
        })
    }

    /// Append a row/column with off-diagonal entries `row` and diagonal `z`.
    pub fn extend_with(&self, row: &[i64], z: i64) -> Result<Self> {
        if row.len() != self.n {
            return Err(contract(format!(
                "extension row has length {} but dimension is {}",
                row.len(),
                self.n
            )));
        }
        check_capacity(self.n + 1)?;
        let mut next = self.clone();
        next.lower.extend_from_slice(row);
        next.lower.push(z);
        next.n += 1;
        next.seed_path.push(RowSource::Explicit);
        debug_assert!(next.lower.len() == next.n * (next.n + 1) / 2);
        debug_assert!(next.lower[..self.lower.len()] == self.lower[..]);
        Ok(next)
    }

    /// Check that `A` and `B` live in `{1, …, n}`.
    pub fn check_sets(&self, a: &IndexSet, b: &IndexSet) -> Result<()> {
        for s in [a, b] {
            if let Some(last) = s.iter().last() {
                if last > self.n {
                    return Err(contract(format!(
                        "index {last} outside matrix of dimension {}",
                        self.n
                    )));
                }
            }
        }
        Ok(())
    }

    /// `M[A, B]` with rows and columns in ascending index order.
    pub fn submatrix(&self, a: &IndexSet, b: &IndexSet) -> Result<Matrix> {
        self.check_sets(a, b)?;
        let rows = a.to_vec();
        let cols = b.to_vec();
        Ok(Matrix::from_fn(rows.len(), cols.len(), |i, j| {
            self.entry(rows[i], cols[j])
        }))
    }
}

impl fmt::Debug for SymmetricMatrixProcess {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymmetricMatrixProcess(n={}) ", self.n)?;
        fmt::Debug::fmt(&self.to_matrix(), f)
    }
}

/// Sample an `n×n` random symmetric matrix. Row `k` is drawn with the
/// generator for step `k`, which makes the result a prefix-coupled
/// process.
pub fn sample_symmetric(
    n: usize,
    dist: &EntryDistribution,
    seed: SeedSpec,
) -> Result<SymmetricMatrixProcess> {
    if n == 0 {
        return Err(contract("dimension must be at least 1"));
    }
    check_capacity(n)?;
    let mut m = SymmetricMatrixProcess::empty(dist.clone());
    for _ in 0..n {
        m = extend_symmetric(&m, seed)?;
    }
    Ok(m)
}

/// Expose one more row and column.
pub fn extend_symmetric(
    m: &SymmetricMatrixProcess,
    seed: SeedSpec,
) -> Result<SymmetricMatrixProcess> {
    let step = m.n as u64 + 1;
    check_capacity(m.n + 1)?;
    let mut rng = seed.rng_for_step(step);
    let row: Vec<i64> = (0..m.n).map(|_| m.dist.off_diag.sample(&mut rng)).collect();
    let z = m.dist.diag.sample(&mut rng);
    let mut next = m.extend_with(&row, z)?;
    *next.seed_path.last_mut().expect("just pushed") = RowSource::Seeded(seed);
    Ok(next)
}

fn check_capacity(n: usize) -> Result<()> {
    if n > MAX_GROUND {
        return Err(LabError::Capacity {
            what: "matrix dimension (bitmask mode)",
            limit: MAX_GROUND,
            got: n,
        });
    }
    Ok(())
}
