use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{contract, Result};
use crate::perm::HeavinessThreshold;

/// Multilinear quadratic polynomial in `x_1, …, x_n` with exact integer
/// coefficients. Square terms are folded into the constant (`x_i² = 1`).
#[derive(Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadraticPolynomial {
    n_vars: usize,
    constant: BigInt,
    linear: BTreeMap<usize, BigInt>,
    /// Keys `(i, j)` with `i < j`.
    quadratic: BTreeMap<(usize, usize), BigInt>,
}

impl QuadraticPolynomial {
    pub fn new(n_vars: usize) -> Self {
        QuadraticPolynomial {
            n_vars,
            constant: BigInt::zero(),
            linear: BTreeMap::new(),
            quadratic: BTreeMap::new(),
        }
    }

    /// `c + Σ coeffs[k] · x_{k+1}`.
    pub fn linear_from(constant: i64, coeffs: &[i64]) -> Self {
        let mut p = Self::new(coeffs.len());
        p.constant = constant.into();
        for (k, &c) in coeffs.iter().enumerate() {
            p.add_linear(k + 1, &c.into()).expect("index in range");
        }
        p
    }

    pub fn n_vars(&self) -> usize {
        self.n_vars
    }

    pub fn constant(&self) -> &BigInt {
        &self.constant
    }

    pub fn linear_coeff(&self, i: usize) -> BigInt {
        self.linear.get(&i).cloned().unwrap_or_default()
    }

    pub fn quadratic_coeff(&self, i: usize, j: usize) -> BigInt {
        if i == j {
            return BigInt::zero();
        }
        self.quadratic
            .get(&(i.min(j), i.max(j)))
            .cloned()
            .unwrap_or_default()
    }

    /// Non-zero degree-1 terms in variable order.
    pub fn linear_terms(&self) -> impl Iterator<Item = (usize, &BigInt)> {
        self.linear.iter().map(|(&i, c)| (i, c))
    }

    /// Non-zero degree-2 terms `((i, j), c)` with `i < j`.
    pub fn quadratic_terms(&self) -> impl Iterator<Item = ((usize, usize), &BigInt)> {
        self.quadratic.iter().map(|(&k, c)| (k, c))
    }

    pub fn is_linear(&self) -> bool {
        self.quadratic.is_empty()
    }

    fn check_var(&self, i: usize) -> Result<()> {
        if i == 0 || i > self.n_vars {
            return Err(contract(format!(
                "variable x{i} outside 1..={}",
                self.n_vars
            )));
        }
        Ok(())
    }

    pub fn add_constant(&mut self, c: &BigInt) {
        self.constant += c;
    }

    pub fn add_linear(&mut self, i: usize, c: &BigInt) -> Result<()> {
        self.check_var(i)?;
        accumulate(&mut self.linear, i, c);
        Ok(())
    }

    /// Add `c · x_i x_j`; `i = j` adds `c` to the constant.
    pub fn add_quadratic(&mut self, i: usize, j: usize, c: &BigInt) -> Result<()> {
        self.check_var(i)?;
        self.check_var(j)?;
        if i == j {
            self.constant += c;
        } else {
            accumulate(&mut self.quadratic, (i.min(j), i.max(j)), c);
        }
        Ok(())
    }

    /// Value at `x` (`x[k]` is `x_{k+1}`).
    pub fn evaluate(&self, x: &[i64]) -> Result<BigInt> {
        if x.len() != self.n_vars {
            return Err(contract(format!(
                "evaluation point has {} coordinates, polynomial has {} variables",
                x.len(),
                self.n_vars
            )));
        }
        let mut v = self.constant.clone();
        for (&i, c) in &self.linear {
            v += c * x[i - 1];
        }
        for (&(i, j), c) in &self.quadratic {
            v += c * (x[i - 1] * x[j - 1]);
        }
        Ok(v)
    }

    /// Fix the variables in `values`; the others stay free.
    pub fn substitute(&self, values: &BTreeMap<usize, i64>) -> Result<Self> {
        for &i in values.keys() {
            self.check_var(i)?;
        }
        let mut out = Self::new(self.n_vars);
        out.constant = self.constant.clone();
        for (&i, c) in &self.linear {
            match values.get(&i) {
                Some(&v) => out.constant += c * v,
                None => accumulate(&mut out.linear, i, c),
            }
        }
        for (&(i, j), c) in &self.quadratic {
            match (values.get(&i), values.get(&j)) {
                (Some(&u), Some(&v)) => out.constant += c * (u * v),
                (Some(&u), None) => accumulate(&mut out.linear, j, &(c * u)),
                (None, Some(&v)) => accumulate(&mut out.linear, i, &(c * v)),
                (None, None) => accumulate(&mut out.quadratic, (i, j), c),
            }
        }
        Ok(out)
    }

    /// Drop the degree-2 terms selected by `drop`; returns the removed
    /// terms.
    pub fn remove_quadratic_where(
        &mut self,
        mut drop: impl FnMut(usize, usize, &BigInt) -> bool,
    ) -> Vec<((usize, usize), BigInt)> {
        let removed: Vec<_> = self
            .quadratic
            .iter()
            .filter(|(&(i, j), c)| drop(i, j, c))
            .map(|(&k, c)| (k, c.clone()))
            .collect();
        for (k, _) in &removed {
            self.quadratic.remove(k);
        }
        removed
    }

    /// Variables with a non-zero coefficient.
    pub fn support(&self) -> Vec<usize> {
        let mut vars: Vec<usize> = self.linear.keys().copied().collect();
        for &(i, j) in self.quadratic.keys() {
            vars.push(i);
            vars.push(j);
        }
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// Variables appearing in some term whose coefficient is at least `r`
    /// in absolute value.
    pub fn variables_in_large_terms(&self, r: &HeavinessThreshold) -> Vec<usize> {
        let mut vars: Vec<usize> = self
            .linear
            .iter()
            .filter(|(_, c)| r.admits(c))
            .map(|(&i, _)| i)
            .collect();
        for (&(i, j), c) in &self.quadratic {
            if r.admits(c) {
                vars.push(i);
                vars.push(j);
            }
        }
        vars.sort_unstable();
        vars.dedup();
        vars
    }

    /// `Σ |coefficients|`, a bound on `|f(ξ)|` over the cube.
    pub fn l1_norm(&self) -> BigInt {
        let mut s = self.constant.abs();
        for c in self.linear.values().chain(self.quadratic.values()) {
            s += c.abs();
        }
        s
    }
}

fn accumulate<K: Ord + Copy>(map: &mut BTreeMap<K, BigInt>, k: K, c: &BigInt) {
    if c.is_zero() {
        return;
    }
    let e = map.entry(k).or_default();
    *e += c;
    if e.is_zero() {
        map.remove(&k);
    }
}

impl fmt::Display for QuadraticPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, c: &BigInt, mono: String| -> fmt::Result {
            let (sign, mag) = if c.is_negative() {
                ("-", -c)
            } else {
                ("+", c.clone())
            };
            if first {
                if c.is_negative() {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {sign} ")?;
            }
            first = false;
            match (mono.is_empty(), mag.is_one()) {
                (true, _) => write!(f, "{mag}"),
                (false, true) => write!(f, "{mono}"),
                (false, false) => write!(f, "{mag}*{mono}"),
            }
        };
        if !self.constant.is_zero() {
            term(f, &self.constant, String::new())?;
        }
        for (&i, c) in &self.linear {
            term(f, c, format!("x{i}"))?;
        }
        for (&(i, j), c) in &self.quadratic {
            term(f, c, format!("x{i}*x{j}"))?;
        }
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

impl fmt::Debug for QuadraticPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "QuadraticPolynomial[{}]({self})", self.n_vars)
    }
}
