//! Second moment of the permanent of a random symmetric sign matrix.
//!
//! `E[(per M_n)²] = Σ_{π,π'} E[X_π X_π']`, and `E[X_π X_π'] = 1` exactly
//! when `π, π'` share the signature `(I_π, F_π)`. The class of `π` has
//! `(|I_π|-1)!! · 2^c` members, `c` the number of cycles of length at
//! least 3, so the sum of squared class sizes is one pass over `S_n`.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Pow, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distribution::EntryDistribution;
use crate::error::{contract, LabError, Result};
use crate::index_set::IndexSet;
use crate::matrix::{sample_symmetric, Matrix};
use crate::perm::{permanent, permanent_naive};
use crate::seed::SeedSpec;

pub const EXACT_MAX_N: usize = 11;
pub const ENUMERATE_MAX_N: usize = 4;
pub const CLASS_ORACLE_MAX_N: usize = 9;
pub const Q_CLASS_MAX_N: usize = 10;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PermutationSignature {
    /// Indices lying in 2-cycles.
    pub i: IndexSet,
    /// `{i, π(i)}` for `i ∉ I`, sorted; fixed points give singletons.
    pub f: BTreeSet<Vec<usize>>,
}

fn check_perm(pi: &[usize]) -> Result<()> {
    let mut seen = 0u64;
    for &v in pi {
        if v == 0 || v > pi.len() || seen >> (v - 1) & 1 == 1 {
            return Err(contract(format!(
                "{pi:?} is not a permutation of 1..{}",
                pi.len()
            )));
        }
        seen |= 1 << (v - 1);
    }
    Ok(())
}

/// `(I_π, F_π)` for `π` given by its images, `pi[i-1] = π(i)`.
pub fn signature(pi: &[usize]) -> Result<PermutationSignature> {
    check_perm(pi)?;
    let n = pi.len();
    let two_cycle = |i: usize| {
        let j = pi[i - 1];
        j != i && pi[j - 1] == i
    };
    let i = IndexSet::from_indices(n, (1..=n).filter(|&i| two_cycle(i)))?;
    let f = (1..=n)
        .filter(|&v| !i.contains(v))
        .map(|v| {
            let w = pi[v - 1];
            if v == w {
                vec![v]
            } else {
                vec![v.min(w), v.max(w)]
            }
        })
        .collect();
    Ok(PermutationSignature { i, f })
}

/// `(|I_π|, cycles of length ≥ 3)` for 0-based images.
fn cycle_shape(p: &[u8]) -> (usize, u32) {
    let mut seen = 0u32;
    let (mut k, mut long) = (0, 0);
    for s in 0..p.len() {
        if seen >> s & 1 == 1 {
            continue;
        }
        let mut len = 0;
        let mut v = s;
        while seen >> v & 1 == 0 {
            seen |= 1 << v;
            v = p[v] as usize;
            len += 1;
        }
        match len {
            2 => k += 2,
            l if l >= 3 => long += 1,
            _ => {}
        }
    }
    (k, long)
}

fn double_factorial_odd(k: usize) -> u128 {
    // (k-1)!! for even k
    (1..k).step_by(2).map(|v| v as u128).product()
}

/// Visit every permutation of `p[from..]` (Heap's algorithm).
fn for_each_perm(p: &mut [u8], from: usize, mut visit: impl FnMut(&[u8])) {
    let len = p.len() - from;
    let mut c = vec![0usize; len];
    visit(p);
    let mut i = 1;
    while i < len {
        if c[i] < i {
            let j = if i % 2 == 0 { 0 } else { c[i] };
            p.swap(from + j, from + i);
            visit(p);
            c[i] += 1;
            i = 1;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Per-`k` permutation counts and the class-size sum, split by `π(1)`.
fn scan(n: usize) -> (Vec<u64>, u128) {
    if n == 0 {
        return (vec![1], 1);
    }
    (0..n)
        .into_par_iter()
        .map(|first| {
            let mut p: Vec<u8> = std::iter::once(first as u8)
                .chain((0..n as u8).filter(|&v| v as usize != first))
                .collect();
            let mut counts = vec![0u64; n + 1];
            let mut total: u128 = 0;
            for_each_perm(&mut p, 1, |q| {
                let (k, long) = cycle_shape(q);
                counts[k] += 1;
                total += double_factorial_odd(k) << long;
            });
            (counts, total)
        })
        .reduce(
            || (vec![0u64; n + 1], 0),
            |(mut a, ta), (b, tb)| {
                for (x, y) in a.iter_mut().zip(b) {
                    *x += y;
                }
                (a, ta + tb)
            },
        )
}

fn capacity(what: &'static str, limit: usize, got: usize) -> LabError {
    LabError::Capacity { what, limit, got }
}

/// `E[(per M_n)²]` as the sum of squared signature-class sizes.
pub fn second_moment_exact(n: usize) -> Result<BigInt> {
    if n > EXACT_MAX_N {
        return Err(capacity("second moment dimension", EXACT_MAX_N, n));
    }
    Ok(BigInt::from(scan(n).1))
}

/// The same sum with explicit signature classes in a hash map.
pub fn second_moment_by_classes(n: usize) -> Result<BigInt> {
    if n > CLASS_ORACLE_MAX_N {
        return Err(capacity(
            "signature class oracle dimension",
            CLASS_ORACLE_MAX_N,
            n,
        ));
    }
    let mut classes: HashMap<PermutationSignature, u64> = HashMap::new();
    let mut p: Vec<u8> = (0..n as u8).collect();
    let mut err = None;
    for_each_perm(&mut p, 0, |q| {
        let images: Vec<usize> = q.iter().map(|&v| v as usize + 1).collect();
        match signature(&images) {
            Ok(s) => *classes.entry(s).or_default() += 1,
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(classes.values().map(|&c| BigInt::from(c) * c).sum())
}

/// Every symmetric `±1` matrix of order `n`, in a fixed order.
pub fn all_sign_matrices(n: usize) -> Result<impl Iterator<Item = Matrix>> {
    if n > ENUMERATE_MAX_N {
        return Err(capacity(
            "sign matrix enumeration dimension",
            ENUMERATE_MAX_N,
            n,
        ));
    }
    let slots: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    Ok((0u64..1 << slots.len()).map(move |bits| {
        let mut m = Matrix::zeros(n, n);
        for (b, &(i, j)) in slots.iter().enumerate() {
            let v = if bits >> b & 1 == 1 { -1 } else { 1 };
            m.set(i, j, v);
            m.set(j, i, v);
        }
        m
    }))
}

/// Permanents of all symmetric `±1` matrices of order `n`.
pub fn enumerate_permanents(n: usize) -> Result<Vec<BigInt>> {
    all_sign_matrices(n)?.map(|m| permanent_naive(&m)).collect()
}

/// Average of `(per M)²` over every symmetric `±1` matrix.
pub fn second_moment_enumerate(n: usize) -> Result<BigRational> {
    let pers = enumerate_permanents(n)?;
    let total: BigInt = pers.iter().map(|p| p * p).sum();
    Ok(BigRational::new(total, BigInt::from(pers.len())))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QClassCheck {
    pub n: usize,
    pub k: usize,
    /// `|Q_k|`, permutations with `|I_π| = k`.
    pub count: u64,
    /// `C(n,k) k^(k/2) (n-k)!`, exact for even `k`.
    pub bound: Option<BigInt>,
    /// The bound squared, exact for every `k`.
    pub bound_squared: BigInt,
    pub holds: bool,
}

fn factorial(n: usize) -> BigInt {
    (1..=n).map(BigInt::from).product()
}

fn binom(n: usize, k: usize) -> BigInt {
    crate::anticonc::binomial(n as u64, k as u64)
}

/// `|Q_k|` for every `k` at once.
pub fn q_class_counts(n: usize) -> Result<Vec<u64>> {
    if n > Q_CLASS_MAX_N {
        return Err(capacity("Q_k enumeration dimension", Q_CLASS_MAX_N, n));
    }
    Ok(scan(n).0)
}

pub fn q_class_bound_check(n: usize, k: usize) -> Result<QClassCheck> {
    if k > n {
        return Err(contract(format!("k = {k} exceeds n = {n}")));
    }
    let count = q_class_counts(n)?[k];
    let base = binom(n, k) * factorial(n - k);
    let kk = BigInt::from(k);
    let bound_squared = &base * &base * Pow::pow(&kk, k as u32);
    let bound = k
        .is_multiple_of(2)
        .then(|| &base * Pow::pow(&kk, (k / 2) as u32));
    let c = BigInt::from(count);
    Ok(QClassCheck {
        n,
        k,
        count,
        bound,
        bound_squared: bound_squared.clone(),
        holds: &c * &c <= bound_squared,
    })
}

/// `4ⁿ Σ_k k^k n^(n-k)`, the explicit bound behind `E[(per M_n)²] ≤ n^(n+o(n))`.
pub fn intermediate_bound(n: usize) -> BigInt {
    let nn = BigInt::from(n);
    let sum: BigInt = (0..=n)
        .map(|k| Pow::pow(&BigInt::from(k), k as u32) * Pow::pow(&nn, (n - k) as u32))
        .sum();
    Pow::pow(&BigInt::from(4), n as u32) * sum
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarkovTail {
    pub n: usize,
    pub epsilon: BigRational,
    pub second_moment: BigInt,
    /// `n + 2εn`.
    pub exponent: BigRational,
    /// `E[(per)²] / n^(n+2εn)` when the exponent is an integer.
    pub exact: Option<BigRational>,
    /// Outward-rounded enclosure of the bound.
    pub lower: BigRational,
    pub upper: BigRational,
}

impl MarkovTail {
    pub fn value(&self) -> f64 {
        let mid = (&self.lower + &self.upper) / BigRational::from_integer(2.into());
        mid.to_f64().unwrap_or(f64::NAN)
    }
}

/// Markov's inequality for `Pr(|per M_n| ≥ n^(n/2+εn))`.
pub fn markov_upper_tail(n: usize, epsilon: &BigRational) -> Result<MarkovTail> {
    if n == 0 || *epsilon < BigRational::zero() {
        return Err(LabError::InvalidParams(format!(
            "need n ≥ 1 and ε ≥ 0, got n = {n}, ε = {epsilon}"
        )));
    }
    let second = second_moment_exact(n)?;
    let nn = BigRational::from_integer(n.into());
    let exponent = &nn + BigRational::from_integer(2.into()) * epsilon * &nn;
    let e = BigRational::from_integer(second.clone());
    let p = exponent
        .numer()
        .to_u32()
        .ok_or_else(|| contract("exponent too large"))?;
    let q = exponent
        .denom()
        .to_u32()
        .ok_or_else(|| contract("exponent too large"))?;
    let power = Pow::pow(&BigInt::from(n), p);
    let (lo_root, hi_root) = {
        let r = power.nth_root(q);
        if Pow::pow(&r, q) == power {
            (r.clone(), r)
        } else {
            (r.clone(), r + 1)
        }
    };
    let exact = (q == 1).then(|| &e / BigRational::from_integer(lo_root.clone()));
    Ok(MarkovTail {
        n,
        epsilon: epsilon.clone(),
        second_moment: second,
        exponent,
        exact,
        lower: &e / BigRational::from_integer(hi_root),
        upper: &e / BigRational::from_integer(lo_root),
    })
}

/// `Pr(per² ≥ s)` over every symmetric `±1` matrix, and the Markov
/// bound `E[per²]/s`.
pub fn markov_square_check(n: usize, s: &BigInt) -> Result<(BigRational, BigRational)> {
    if *s <= BigInt::zero() {
        return Err(LabError::InvalidParams(
            "threshold s must be positive".into(),
        ));
    }
    let pers = enumerate_permanents(n)?;
    let hits = pers.iter().filter(|p| &(*p * *p) >= s).count();
    let prob = BigRational::new(hits.into(), pers.len().into());
    let second = second_moment_exact(n)?;
    Ok((prob, BigRational::new(second, s.clone())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonteCarloMoment {
    pub n: usize,
    pub samples: usize,
    pub mean: f64,
    pub std_err: f64,
}

/// Sample mean of `(per M_n)²`, sample `s` drawn from stream `s`.
pub fn second_moment_monte_carlo(
    n: usize,
    samples: usize,
    root_seed: u64,
) -> Result<MonteCarloMoment> {
    let dist = EntryDistribution::rademacher();
    let squares: Vec<BigInt> = (0..samples)
        .into_par_iter()
        .map(|s| {
            let m = sample_symmetric(n, &dist, SeedSpec::new(root_seed, s as u64))?;
            let p = permanent(&m.to_matrix())?;
            Ok(&p * &p)
        })
        .collect::<Result<_>>()?;
    let count = BigInt::from(samples.max(1));
    let sum: BigInt = squares.iter().sum();
    let sum_sq: BigInt = squares.iter().map(|v| v * v).sum();
    let mean = BigRational::new(sum.clone(), count.clone());
    // unbiased variance (Σv² - (Σv)²/N) / (N-1)
    let var = if samples > 1 {
        (BigRational::from_integer(sum_sq) - BigRational::new(&sum * &sum, count.clone()))
            / BigRational::from_integer(BigInt::from(samples - 1))
    } else {
        BigRational::zero()
    };
    let var_f = var.to_f64().unwrap_or(f64::NAN);
    Ok(MonteCarloMoment {
        n,
        samples,
        mean: mean.to_f64().unwrap_or(f64::NAN),
        std_err: (var_f / samples.max(1) as f64).sqrt(),
    })
}
