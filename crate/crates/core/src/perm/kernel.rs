//! Exact permanent kernels.
//!
//! All kernels return exact integers. The Ryser and Glynn fast paths run in
//! wrapping 128-bit arithmetic: every intermediate value is only needed
//! modulo 2^128, and the final answer is exact whenever the a-priori bound
//! `n! · max|a|^n` (times `2^(n-1)` for Glynn) is below 2^127. Larger
//! inputs fall back to big integers.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::error::{contract, LabError, Result};
use crate::matrix::Matrix;

pub type PermanentValue = BigInt;

/// Largest dimension accepted by the factorial-time oracle.
pub const NAIVE_MAX: usize = 12;
/// Largest dimension the subset-enumeration kernels will attempt.
pub const RYSER_MAX: usize = 40;

fn require_square(m: &Matrix) -> Result<usize> {
    if !m.is_square() {
        return Err(contract(format!(
            "matrix is {}x{}, not square",
            m.rows(),
            m.cols()
        )));
    }
    Ok(m.rows())
}

/// Sum over all `n!` permutations. The independent oracle for the other
/// kernels.
pub fn permanent_naive(m: &Matrix) -> Result<PermanentValue> {
    let n = require_square(m)?;
    if n > NAIVE_MAX {
        return Err(LabError::Capacity {
            what: "naive permanent dimension",
            limit: NAIVE_MAX,
            got: n,
        });
    }
    fn go(m: &Matrix, row: usize, used: u32, prod: &BigInt, acc: &mut BigInt) {
        let n = m.rows();
        if row == n {
            *acc += prod;
            return;
        }
        for c in 0..n {
            if used & (1 << c) == 0 {
                let v = m.get(row, c);
                if v != 0 {
                    go(m, row + 1, used | (1 << c), &(prod * v), acc);
                }
            }
        }
    }
    let mut acc = BigInt::zero();
    go(m, 0, 0, &BigInt::one(), &mut acc);
    Ok(acc)
}

/// `log2` of the a-priori bound `n! · a^n`, rounded up.
fn log2_bound(n: usize, max_abs: u64) -> f64 {
    let lf: f64 = (1..=n).map(|k| (k as f64).log2()).sum();
    lf + n as f64 * (max_abs.max(1) as f64).log2()
}

/// Whether the 128-bit Ryser path is exact for this input.
pub fn ryser_fits_i128(m: &Matrix) -> bool {
    m.is_square() && log2_bound(m.rows(), m.max_abs()) < 126.5 && row_sum_fits(m)
}

fn row_sum_fits(m: &Matrix) -> bool {
    (m.cols() as u128) * (m.max_abs() as u128) < (1u128 << 62)
}

/// Number of row sums whose product is guaranteed to fit in `i64`.
fn chunk_len(n: usize, max_abs: u64) -> usize {
    let bound = (n as f64) * (max_abs.max(1) as f64);
    let c = (62.0 / bound.log2().max(1.0)).floor() as usize;
    c.clamp(1, n.max(1))
}

/// Ryser's formula with Gray-code subset order, 128-bit wrapping fast path.
/// Errors with `Overflow` when the result may not fit.
pub fn permanent_ryser_i128(m: &Matrix) -> Result<i128> {
    let n = require_square(m)?;
    if n == 0 {
        return Ok(1);
    }
    if n > RYSER_MAX {
        return Err(LabError::Capacity {
            what: "Ryser permanent dimension",
            limit: RYSER_MAX,
            got: n,
        });
    }
    if !ryser_fits_i128(m) {
        return Err(LabError::Overflow(format!(
            "permanent bound for n={n}, max|entry|={} exceeds 2^127",
            m.max_abs()
        )));
    }
    let chunk = chunk_len(n, m.max_abs());
    let cols: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| m.get(i, j)).collect())
        .collect();
    let mut sums = vec![0i64; n];
    let mut included = 0u64;
    let mut total: i128 = 0;
    for g in 1u64..(1u64 << n) {
        let j = g.trailing_zeros() as usize;
        let bit = 1u64 << j;
        included ^= bit;
        if included & bit != 0 {
            for (s, a) in sums.iter_mut().zip(&cols[j]) {
                *s += a;
            }
        } else {
            for (s, a) in sums.iter_mut().zip(&cols[j]) {
                *s -= a;
            }
        }
        let mut prod: i128 = 1;
        for part in sums.chunks(chunk) {
            let p: i64 = part.iter().product();
            prod = prod.wrapping_mul(p as i128);
        }
        if included.count_ones() % 2 == 1 {
            total = total.wrapping_sub(prod);
        } else {
            total = total.wrapping_add(prod);
        }
    }
    Ok(if n % 2 == 1 {
        total.wrapping_neg()
    } else {
        total
    })
}

fn permanent_ryser_big(m: &Matrix) -> Result<BigInt> {
    let n = require_square(m)?;
    if n == 0 {
        return Ok(BigInt::one());
    }
    if n > RYSER_MAX {
        return Err(LabError::Capacity {
            what: "Ryser permanent dimension",
            limit: RYSER_MAX,
            got: n,
        });
    }
    let mut sums = vec![BigInt::zero(); n];
    let mut included = 0u64;
    let mut total = BigInt::zero();
    for g in 1u64..(1u64 << n) {
        let j = g.trailing_zeros() as usize;
        let bit = 1u64 << j;
        included ^= bit;
        let add = included & bit != 0;
        for (i, s) in sums.iter_mut().enumerate() {
            if add {
                *s += m.get(i, j);
            } else {
                *s -= m.get(i, j);
            }
        }
        let prod: BigInt = sums.iter().product();
        if included.count_ones() % 2 == 1 {
            total -= prod;
        } else {
            total += prod;
        }
    }
    Ok(if n % 2 == 1 { -total } else { total })
}

/// Exact permanent by Ryser's formula; promotes to big integers when the
/// 128-bit path cannot guarantee exactness.
pub fn permanent_ryser(m: &Matrix) -> Result<PermanentValue> {
    match permanent_ryser_i128(m) {
        Ok(v) => Ok(BigInt::from(v)),
        Err(LabError::Overflow(_)) => permanent_ryser_big(m),
        Err(e) => Err(e),
    }
}

/// Glynn's formula over `2^(n-1)` sign vectors, 128-bit wrapping. Half the
/// work of Ryser; exact while `2^(n-1) · n! · a^n < 2^127`.
pub fn permanent_glynn_i128(m: &Matrix) -> Result<i128> {
    let n = require_square(m)?;
    if n == 0 {
        return Ok(1);
    }
    if log2_bound(n, m.max_abs()) + (n - 1) as f64 >= 126.5 || !row_sum_fits(m) {
        return Err(LabError::Overflow(format!(
            "Glynn accumulator bound for n={n} exceeds 2^127"
        )));
    }
    let chunk = chunk_len(n, m.max_abs());
    let cols: Vec<Vec<i64>> = (0..n)
        .map(|j| (0..n).map(|i| m.get(i, j)).collect())
        .collect();
    let mut sums: Vec<i64> = (0..n).map(|i| m.row(i).iter().sum()).collect();
    let product = |sums: &[i64]| -> i128 {
        let mut prod: i128 = 1;
        for part in sums.chunks(chunk) {
            let p: i64 = part.iter().product();
            prod = prod.wrapping_mul(p as i128);
        }
        prod
    };
    let mut total = product(&sums);
    // Column 0 keeps sign +1; Gray code over the signs of columns 1..n.
    let mut negated = 0u64;
    for g in 1u64..(1u64 << (n - 1)) {
        let j = g.trailing_zeros() as usize + 1;
        let bit = 1u64 << j;
        negated ^= bit;
        if negated & bit != 0 {
            for (s, a) in sums.iter_mut().zip(&cols[j]) {
                *s -= 2 * a;
            }
        } else {
            for (s, a) in sums.iter_mut().zip(&cols[j]) {
                *s += 2 * a;
            }
        }
        let prod = product(&sums);
        if negated.count_ones() % 2 == 1 {
            total = total.wrapping_sub(prod);
        } else {
            total = total.wrapping_add(prod);
        }
    }
    Ok(total >> (n - 1))
}

/// Fastest exact kernel for the input.
pub fn permanent(m: &Matrix) -> Result<PermanentValue> {
    let n = require_square(m)?;
    if n <= 3 {
        return permanent_small(m);
    }
    match permanent_glynn_i128(m) {
        Ok(v) => Ok(BigInt::from(v)),
        Err(LabError::Overflow(_)) => permanent_ryser(m),
        Err(e) => Err(e),
    }
}

fn permanent_small(m: &Matrix) -> Result<PermanentValue> {
    let g = |i, j| BigInt::from(m.get(i, j));
    Ok(match m.rows() {
        0 => BigInt::one(),
        1 => g(0, 0),
        2 => g(0, 0) * g(1, 1) + g(0, 1) * g(1, 0),
        3 => {
            g(0, 0) * (g(1, 1) * g(2, 2) + g(1, 2) * g(2, 1))
                + g(0, 1) * (g(1, 0) * g(2, 2) + g(1, 2) * g(2, 0))
                + g(0, 2) * (g(1, 0) * g(2, 1) + g(1, 1) * g(2, 0))
        }
        _ => unreachable!(),
    })
}
